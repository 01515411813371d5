#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pavetex/error.hpp"

namespace pavetex {

// Interleaved 8-bit RGB frame as delivered by the decoder.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // row-major, 3 bytes per pixel

  bool empty() const { return width <= 0 || height <= 0 || data.empty(); }
};

class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, std::vector<std::uint8_t> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (width_ < 1 || height_ < 1) fail(ErrorKind::InvalidImage, "image dimensions must be positive");
    if (data_.size() != static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_)) {
      fail(ErrorKind::InvalidImage, "pixel buffer does not match width x height");
    }
  }
  GrayImage(int width, int height, std::uint8_t fill)
      : GrayImage(width, height,
                  std::vector<std::uint8_t>(static_cast<std::size_t>(std::max(width, 0)) *
                                                static_cast<std::size_t>(std::max(height, 0)),
                                            fill)) {}

  int width() const { return width_; }
  int height() const { return height_; }
  std::span<const std::uint8_t> data() const { return data_; }
  std::span<std::uint8_t> data() { return data_; }

  std::uint8_t at(int row, int col) const { return data_[static_cast<std::size_t>(row) * width_ + col]; }
  std::uint8_t& at(int row, int col) { return data_[static_cast<std::size_t>(row) * width_ + col]; }

  bool operator==(const GrayImage&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

// Square analysis region cut from the middle of a frame.
class Patch {
 public:
  Patch() = default;
  Patch(int side, std::vector<std::uint8_t> data) : side_(side), data_(std::move(data)) {
    if (side_ < 1) fail(ErrorKind::InvalidImage, "patch side must be positive");
    if (data_.size() != static_cast<std::size_t>(side_) * static_cast<std::size_t>(side_)) {
      fail(ErrorKind::InvalidImage, "patch buffer is not side x side");
    }
  }

  int side() const { return side_; }
  std::span<const std::uint8_t> data() const { return data_; }
  std::uint8_t at(int row, int col) const { return data_[static_cast<std::size_t>(row) * side_ + col]; }

  bool operator==(const Patch&) const = default;

 private:
  int side_ = 0;
  std::vector<std::uint8_t> data_;
};

// Patch whose intensities have been binned into `levels` gray levels.
class QuantizedPatch {
 public:
  QuantizedPatch() = default;
  QuantizedPatch(int side, int levels, std::vector<std::uint8_t> data)
      : side_(side), levels_(levels), data_(std::move(data)) {
    if (levels_ < 2 || levels_ > 256) fail(ErrorKind::InvalidQuantization, "levels must lie in [2, 256]");
    if (side_ < 1 || data_.size() != static_cast<std::size_t>(side_) * static_cast<std::size_t>(side_)) {
      fail(ErrorKind::InvalidImage, "quantized buffer is not side x side");
    }
    for (auto v : data_) {
      if (v >= levels_) fail(ErrorKind::InvalidQuantization, "bin index exceeds level count");
    }
  }

  int side() const { return side_; }
  int levels() const { return levels_; }
  std::span<const std::uint8_t> data() const { return data_; }
  std::uint8_t at(int row, int col) const { return data_[static_cast<std::size_t>(row) * side_ + col]; }

 private:
  int side_ = 0;
  int levels_ = 0;
  std::vector<std::uint8_t> data_;
};

// Rec. 601 luma in integer arithmetic: round(0.299 R + 0.587 G + 0.114 B).
inline std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const unsigned weighted = 299u * r + 587u * g + 114u * b;
  return static_cast<std::uint8_t>(std::min(255u, (weighted + 500u) / 1000u));
}

inline GrayImage to_grayscale(const RgbImage& frame) {
  if (frame.empty()) fail(ErrorKind::InvalidImage, "empty frame");
  const std::size_t pixels = static_cast<std::size_t>(frame.width) * static_cast<std::size_t>(frame.height);
  if (frame.data.size() != pixels * 3) fail(ErrorKind::InvalidImage, "RGB buffer does not match dimensions");
  std::vector<std::uint8_t> gray(pixels);
  for (std::size_t i = 0; i < pixels; ++i) {
    gray[i] = luma(frame.data[3 * i], frame.data[3 * i + 1], frame.data[3 * i + 2]);
  }
  return GrayImage(frame.width, frame.height, std::move(gray));
}

inline Patch extract_center_patch(const GrayImage& img, int side) {
  if (side < 1) fail(ErrorKind::InvalidInput, "patch side must be positive");
  if (side > img.width() || side > img.height()) {
    fail(ErrorKind::PatchTooLarge, "patch side " + std::to_string(side) + " exceeds image " +
                                       std::to_string(img.width()) + "x" + std::to_string(img.height()));
  }
  const int top = (img.height() - side) / 2;
  const int left = (img.width() - side) / 2;
  std::vector<std::uint8_t> out(static_cast<std::size_t>(side) * side);
  for (int r = 0; r < side; ++r) {
    const auto src = img.data().subspan(static_cast<std::size_t>(top + r) * img.width() + left, side);
    std::copy(src.begin(), src.end(), out.begin() + static_cast<std::ptrdiff_t>(r) * side);
  }
  return Patch(side, std::move(out));
}

inline Patch extract_center_patch(const Patch& patch, int side) {
  return extract_center_patch(GrayImage(patch.side(), patch.side(),
                                        std::vector<std::uint8_t>(patch.data().begin(), patch.data().end())),
                              side);
}

inline std::uint8_t quantize_value(std::uint8_t value, int levels) {
  return static_cast<std::uint8_t>((static_cast<unsigned>(value) * static_cast<unsigned>(levels)) / 256u);
}

inline QuantizedPatch quantize(const Patch& patch, int levels) {
  if (levels < 2 || levels > 256) fail(ErrorKind::InvalidQuantization, "levels must lie in [2, 256]");
  std::vector<std::uint8_t> bins(patch.data().size());
  std::transform(patch.data().begin(), patch.data().end(), bins.begin(),
                 [levels](std::uint8_t v) { return quantize_value(v, levels); });
  return QuantizedPatch(patch.side(), levels, std::move(bins));
}

}  // namespace pavetex
