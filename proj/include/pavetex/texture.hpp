#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "pavetex/cooccurrence.hpp"
#include "pavetex/error.hpp"
#include "pavetex/imaging.hpp"
#include "pavetex/spectrum.hpp"
#include "pavetex/stats.hpp"
#include "pavetex/windowed.hpp"

namespace pavetex {

inline constexpr std::size_t kAltRepCount = 16;
inline constexpr std::size_t kCollageCount = kHaralickCount * 5;
inline constexpr std::size_t kFeatureCount = kAltRepCount + kHaralickCount + kCollageCount;  // 94

enum class Aggregation { Mean, Sum };

struct TextureParams {
  int glcm_levels = 16;
  int haralick_window = 11;
  int collage_window = 5;
  int collage_bins = 16;
  Aggregation haralick_aggregation = Aggregation::Mean;
  int peak_min_height = 200;
  int peak_min_separation = 60;
  // Side length at which peak_min_height applies unscaled.
  int peak_reference_side = 500;

  bool operator==(const TextureParams&) const = default;
};

// ---------------------------------------------------------------------------
// Haralick (V_H)

inline std::array<double, kHaralickCount> haralick_vh(const Patch& patch, int window, int levels,
                                                      Aggregation aggregation = Aggregation::Mean) {
  if (window < 3 || window % 2 == 0) fail(ErrorKind::DegenerateInput, "Haralick window must be odd and >= 3");
  if (window > patch.side()) fail(ErrorKind::DegenerateInput, "Haralick window does not fit patch");
  const QuantizedPatch q = quantize(patch, levels);
  std::array<double, kHaralickCount> sums{};
  std::size_t count = 0;
  for_each_window_haralick(view_of(q), window, kStandardOffsets, [&](int, int, const HaralickVector& f) {
    for (std::size_t k = 0; k < kHaralickCount; ++k) sums[k] += f[k];
    ++count;
  });
  if (aggregation == Aggregation::Mean) {
    for (auto& s : sums) s /= static_cast<double>(count);
  }
  return sums;
}

// ---------------------------------------------------------------------------
// Gradients and orientations (CoLlAGe)

struct GradientField {
  int rows = 0;
  int cols = 0;
  std::vector<double> gx;  // d/dX, along columns
  std::vector<double> gy;  // d/dY, along rows (downwards)
};

inline double axis_derivative(double before, double here, double after, bool has_before, bool has_after) {
  if (has_before && has_after) return 0.5 * (after - before);
  if (has_after) return after - here;
  if (has_before) return here - before;
  return 0.0;
}

// Central differences inside, one-sided differences on the border.
inline GradientField gradient_field(const Patch& patch) {
  const int n = patch.side();
  if (n < 3) fail(ErrorKind::DegenerateInput, "gradient needs a side of at least 3");
  GradientField g{n, n, std::vector<double>(static_cast<std::size_t>(n) * n),
                  std::vector<double>(static_cast<std::size_t>(n) * n)};
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const double here = patch.at(r, c);
      const std::size_t idx = static_cast<std::size_t>(r) * n + c;
      g.gx[idx] = axis_derivative(c > 0 ? patch.at(r, c - 1) : 0.0, here, c + 1 < n ? patch.at(r, c + 1) : 0.0,
                                  c > 0, c + 1 < n);
      g.gy[idx] = axis_derivative(r > 0 ? patch.at(r - 1, c) : 0.0, here, r + 1 < n ? patch.at(r + 1, c) : 0.0,
                                  r > 0, r + 1 < n);
    }
  }
  return g;
}

struct OrientationMap {
  int rows = 0;
  int cols = 0;
  std::vector<double> theta;             // radians in [0, pi)
  std::vector<std::uint8_t> degenerate;  // 1 where the window carried no gradient
};

// Angle of the leading eigenvector of the 2x2 structure tensor, folded into [0, pi).
inline double principal_angle(double sxx, double syy, double sxy) {
  double theta = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
  if (theta < 0.0) theta += std::numbers::pi;
  if (theta >= std::numbers::pi) theta -= std::numbers::pi;
  return theta + 0.0;  // normalizes -0.0
}

/// Dominant gradient orientation of every full `window` x `window`
/// neighbourhood. Stacking the window's (gx, gy) pairs as rows of a matrix G,
/// the first principal direction is the top eigenvector of G^T G, i.e. of the
/// summed structure tensor. Output is indexed over the window interior.
inline OrientationMap dominant_orientation_map(const GradientField& g, int window) {
  if (window < 3 || window % 2 == 0) fail(ErrorKind::DegenerateInput, "orientation window must be odd and >= 3");
  if (window > g.rows || window > g.cols) fail(ErrorKind::DegenerateInput, "orientation window larger than field");
  const int W = g.cols;
  const int stride = W + 1;
  std::vector<double> ixx(static_cast<std::size_t>(g.rows + 1) * stride, 0.0);
  std::vector<double> iyy(ixx.size(), 0.0), ixy(ixx.size(), 0.0);
  for (int r = 0; r < g.rows; ++r) {
    double rxx = 0.0, ryy = 0.0, rxy = 0.0;
    for (int c = 0; c < W; ++c) {
      const std::size_t src = static_cast<std::size_t>(r) * W + c;
      rxx += g.gx[src] * g.gx[src];
      ryy += g.gy[src] * g.gy[src];
      rxy += g.gx[src] * g.gy[src];
      const std::size_t dst = static_cast<std::size_t>(r + 1) * stride + c + 1;
      ixx[dst] = ixx[dst - stride] + rxx;
      iyy[dst] = iyy[dst - stride] + ryy;
      ixy[dst] = ixy[dst - stride] + rxy;
    }
  }
  auto box = [&](const std::vector<double>& integral, int r, int c) {
    const std::size_t a = static_cast<std::size_t>(r) * stride + c;
    const std::size_t b = static_cast<std::size_t>(r + window) * stride + c;
    return integral[b + window] - integral[b] - integral[a + window] + integral[a];
  };

  OrientationMap out;
  out.rows = g.rows - window + 1;
  out.cols = g.cols - window + 1;
  out.theta.resize(static_cast<std::size_t>(out.rows) * out.cols);
  out.degenerate.resize(out.theta.size());
  for (int r = 0; r < out.rows; ++r) {
    for (int c = 0; c < out.cols; ++c) {
      const double sxx = box(ixx, r, c);
      const double syy = box(iyy, r, c);
      const double sxy = box(ixy, r, c);
      const std::size_t idx = static_cast<std::size_t>(r) * out.cols + c;
      if (sxx + syy == 0.0) {
        out.theta[idx] = 0.0;
        out.degenerate[idx] = 1;
      } else {
        out.theta[idx] = principal_angle(sxx, syy, sxy);
        out.degenerate[idx] = 0;
      }
    }
  }
  return out;
}

inline std::uint8_t orientation_bin(double theta, int bins) {
  const int bin = static_cast<int>(std::floor(theta * bins / std::numbers::pi));
  return static_cast<std::uint8_t>(std::clamp(bin, 0, bins - 1));
}

// The five first-order statistics, in output order.
inline std::array<double, 5> five_stats(std::span<const double> values) {
  const Moments m = moments_of(values);
  return {m.mean, m.median, m.stddev, m.skewness, m.kurtosis};
}

/// CoLlAGe descriptor: 13 Haralick maps over local co-occurrence of
/// quantized dominant orientations, each reduced to five statistics.
/// Layout is feature-major: [energy: mean, median, std, skew, kurt, contrast: ...].
inline std::array<double, kCollageCount> collage_vc(const Patch& patch, int window, int bins) {
  if (bins < 2 || bins > 256) fail(ErrorKind::InvalidQuantization, "orientation bins must lie in [2, 256]");
  if (window < 3 || window % 2 == 0) fail(ErrorKind::DegenerateInput, "CoLlAGe window must be odd and >= 3");
  // Orientation interior is side - window + 1; the co-occurrence window must fit in it.
  if (patch.side() < 2 * window - 1) fail(ErrorKind::DegenerateInput, "patch too small for CoLlAGe window");

  const OrientationMap orient = dominant_orientation_map(gradient_field(patch), window);
  std::vector<std::uint8_t> binned(orient.theta.size());
  for (std::size_t i = 0; i < binned.size(); ++i) binned[i] = orientation_bin(orient.theta[i], bins);
  const LevelView grid{orient.rows, orient.cols, bins, binned};
  const HaralickMaps maps = windowed_haralick_maps(grid, window, kStandardOffsets);

  std::array<double, kCollageCount> out{};
  for (std::size_t k = 0; k < kHaralickCount; ++k) {
    const auto s = five_stats(maps.maps[k]);
    std::copy(s.begin(), s.end(), out.begin() + static_cast<std::ptrdiff_t>(5 * k));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Alternate representations (V_A)

struct Peak {
  int index = 0;
  std::int64_t height = 0;
  bool operator==(const Peak&) const = default;
};

inline std::array<std::int64_t, 256> intensity_histogram(const Patch& patch) {
  std::array<std::int64_t, 256> h{};
  for (auto v : patch.data()) ++h[v];
  return h;
}

/// Local maxima of a 256-bin histogram at least `min_height` tall, accepted
/// greedily from tallest down (lower index first on ties) and suppressed
/// when closer than `min_separation` bins to an accepted peak. Returned in
/// index order.
inline std::vector<Peak> histogram_peaks(std::span<const std::int64_t, 256> hist, double min_height,
                                         int min_separation) {
  std::vector<Peak> candidates;
  for (int i = 0; i < 256; ++i) {
    const std::int64_t h = hist[i];
    if (h <= 0 || static_cast<double>(h) < min_height) continue;
    const std::int64_t left = i > 0 ? hist[i - 1] : 0;
    const std::int64_t right = i < 255 ? hist[i + 1] : 0;
    if (h >= left && h >= right) candidates.push_back({i, h});
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Peak& a, const Peak& b) { return a.height > b.height; });
  std::vector<Peak> accepted;
  for (const Peak& p : candidates) {
    const bool clear = std::none_of(accepted.begin(), accepted.end(), [&](const Peak& q) {
      return std::abs(p.index - q.index) < min_separation;
    });
    if (clear) accepted.push_back(p);
  }
  std::sort(accepted.begin(), accepted.end(), [](const Peak& a, const Peak& b) { return a.index < b.index; });
  return accepted;
}

inline std::vector<Peak> histogram_peaks(const Patch& patch, double min_height = 200.0, int min_separation = 60) {
  const auto hist = intensity_histogram(patch);
  return histogram_peaks(std::span<const std::int64_t, 256>(hist), min_height, min_separation);
}

// Mean, median and skewness of the normalized DFT magnitude spectrum.
inline std::array<double, 3> fourier_stats(const Patch& patch) {
  if (patch.side() < 2) fail(ErrorKind::DegenerateInput, "Fourier statistics need a side of at least 2");
  std::vector<double> values(patch.data().begin(), patch.data().end());
  const auto mags = dft_magnitudes(values, patch.side(), patch.side());
  const Moments m = moments_of(mags);
  return {m.mean, m.median, m.skewness};
}

// Counts of max - min over each pixel's 3x3 neighbourhood, borders replicated.
inline std::array<std::int64_t, 256> range_histogram(const Patch& patch) {
  const int n = patch.side();
  std::vector<std::uint8_t> hmax(patch.data().size()), hmin(patch.data().size());
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const std::uint8_t a = patch.at(r, std::max(c - 1, 0));
      const std::uint8_t b = patch.at(r, c);
      const std::uint8_t d = patch.at(r, std::min(c + 1, n - 1));
      const std::size_t idx = static_cast<std::size_t>(r) * n + c;
      hmax[idx] = std::max({a, b, d});
      hmin[idx] = std::min({a, b, d});
    }
  }
  std::array<std::int64_t, 256> hist{};
  for (int r = 0; r < n; ++r) {
    const std::size_t up = static_cast<std::size_t>(std::max(r - 1, 0)) * n;
    const std::size_t mid = static_cast<std::size_t>(r) * n;
    const std::size_t down = static_cast<std::size_t>(std::min(r + 1, n - 1)) * n;
    for (int c = 0; c < n; ++c) {
      const auto hi = std::max({hmax[up + c], hmax[mid + c], hmax[down + c]});
      const auto lo = std::min({hmin[up + c], hmin[mid + c], hmin[down + c]});
      ++hist[static_cast<std::size_t>(hi - lo)];
    }
  }
  return hist;
}

inline std::array<double, 5> five_stats(const Moments& m) { return {m.mean, m.median, m.stddev, m.skewness, m.kurtosis}; }

inline std::array<double, 5> range_filter_stats(const Patch& patch) {
  if (patch.side() < 3) fail(ErrorKind::DegenerateInput, "range filter needs a side of at least 3");
  const auto hist = range_histogram(patch);
  return five_stats(moments_of_counts(std::span<const std::int64_t>(hist)));
}

// Peak height threshold for a patch of the given side, scaled by area
// below the reference side.
inline double scaled_peak_height(const TextureParams& params, int side) {
  const double ratio = static_cast<double>(side) / params.peak_reference_side;
  return params.peak_min_height * std::min(1.0, ratio * ratio);
}

/// V_A layout:
///   0  peak count          1  mean spacing between adjacent peaks (0 if < 2 peaks)
///   2  spectrum mean       3  spectrum median       4  spectrum skewness
///   5  range mean          6  range median          7  range std
///   8  range skewness      9  range kurtosis
///   10 intensity mean      11 intensity median      12 intensity std
///   13 intensity skewness  14 intensity kurtosis    15 histogram entropy (bits)
inline std::array<double, kAltRepCount> altrep_va(const Patch& patch, const TextureParams& params = {}) {
  std::array<double, kAltRepCount> out{};
  const auto hist = intensity_histogram(patch);
  const auto peaks = histogram_peaks(std::span<const std::int64_t, 256>(hist),
                                     scaled_peak_height(params, patch.side()), params.peak_min_separation);
  out[0] = static_cast<double>(peaks.size());
  if (peaks.size() >= 2) {
    out[1] = static_cast<double>(peaks.back().index - peaks.front().index) / static_cast<double>(peaks.size() - 1);
  }
  const auto fourier = fourier_stats(patch);
  std::copy(fourier.begin(), fourier.end(), out.begin() + 2);
  const auto range = range_filter_stats(patch);
  std::copy(range.begin(), range.end(), out.begin() + 5);
  const auto intensity = five_stats(moments_of_counts(std::span<const std::int64_t>(hist)));
  std::copy(intensity.begin(), intensity.end(), out.begin() + 10);
  out[15] = entropy_bits(std::span<const std::int64_t>(hist));
  return out;
}

// ---------------------------------------------------------------------------
// Feature space

/// The 94-value descriptor, ordered [V_A (16) | V_H (13) | V_C (65)].
struct FeatureVector {
  std::array<double, kFeatureCount> fs{};

  std::span<const double, kAltRepCount> va() const { return std::span(fs).subspan<0, kAltRepCount>(); }
  std::span<const double, kHaralickCount> vh() const {
    return std::span(fs).subspan<kAltRepCount, kHaralickCount>();
  }
  std::span<const double, kCollageCount> vc() const {
    return std::span(fs).subspan<kAltRepCount + kHaralickCount, kCollageCount>();
  }

  bool operator==(const FeatureVector&) const = default;
};

inline FeatureVector extract_fs(const Patch& patch, const TextureParams& params = {}) {
  FeatureVector out;
  const auto va = altrep_va(patch, params);
  const auto vh = haralick_vh(patch, params.haralick_window, params.glcm_levels, params.haralick_aggregation);
  const auto vc = collage_vc(patch, params.collage_window, params.collage_bins);
  auto it = std::copy(va.begin(), va.end(), out.fs.begin());
  it = std::copy(vh.begin(), vh.end(), it);
  std::copy(vc.begin(), vc.end(), it);
  return out;
}

// Stable column names f000..f093.
inline std::string feature_column_name(std::size_t index) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "f%03zu", index);
  return buf;
}

}  // namespace pavetex
