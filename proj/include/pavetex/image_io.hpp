#pragma once

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <cstring>
#include <filesystem>
#include <string>
#include <system_error>
#include <vector>

#include "pavetex/error.hpp"
#include "pavetex/imaging.hpp"

namespace pavetex {

// PNG or JPEG from disk, channels in R, G, B order. Grayscale files come
// back with the three channels equal.
inline RgbImage read_rgb(const std::filesystem::path& path) {
  const cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) fail(ErrorKind::IoError, "cannot decode image " + path.string());
  RgbImage out{bgr.cols, bgr.rows, std::vector<std::uint8_t>(static_cast<std::size_t>(bgr.cols) * bgr.rows * 3)};
  for (int r = 0; r < bgr.rows; ++r) {
    const auto* src = bgr.ptr<cv::Vec3b>(r);
    for (int c = 0; c < bgr.cols; ++c) {
      const std::size_t i = (static_cast<std::size_t>(r) * bgr.cols + c) * 3;
      out.data[i] = src[c][2];
      out.data[i + 1] = src[c][1];
      out.data[i + 2] = src[c][0];
    }
  }
  return out;
}

inline GrayImage read_gray(const std::filesystem::path& path) { return to_grayscale(read_rgb(path)); }

// Lossless 8-bit PNG with fixed encoder settings, so equal images give
// equal files.
inline void write_png(const std::filesystem::path& path, const GrayImage& img) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  cv::Mat m(img.height(), img.width(), CV_8UC1);
  std::memcpy(m.data, img.data().data(), img.data().size());
  const std::vector<int> params{cv::IMWRITE_PNG_COMPRESSION, 6, cv::IMWRITE_PNG_STRATEGY, cv::IMWRITE_PNG_STRATEGY_DEFAULT};
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), m, params);
  } catch (const cv::Exception& e) {
    fail(ErrorKind::IoError, "cannot write " + path.string() + ": " + e.what());
  }
  if (!ok) fail(ErrorKind::IoError, "cannot write " + path.string());
}

}  // namespace pavetex
