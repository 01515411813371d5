#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string_view>
#include <vector>

#include "pavetex/error.hpp"
#include "pavetex/imaging.hpp"
#include "pavetex/stats.hpp"

namespace pavetex {

// Non-owning view of a grid of level indices (quantized intensities or
// quantized orientations).
struct LevelView {
  int rows = 0;
  int cols = 0;
  int levels = 0;
  std::span<const std::uint8_t> data;

  std::uint8_t at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
};

inline LevelView view_of(const QuantizedPatch& q) { return {q.side(), q.side(), q.levels(), q.data()}; }

struct Offset {
  int dr = 0;
  int dc = 0;
};

// 0, 45, 90 and 135 degree neighbours at distance one.
inline constexpr std::array<Offset, 4> kStandardOffsets{{{0, 1}, {1, 0}, {1, 1}, {1, -1}}};

inline constexpr std::size_t kHaralickCount = 13;
using HaralickVector = std::array<double, kHaralickCount>;

enum HaralickFeature : std::size_t {
  kEnergy = 0,
  kContrast,
  kCorrelation,
  kVariance,
  kInverseDifferenceMoment,
  kSumAverage,
  kSumVariance,
  kSumEntropy,
  kEntropy,
  kDifferenceVariance,
  kDifferenceEntropy,
  kInformationCorrelation1,
  kInformationCorrelation2,
};

inline constexpr std::array<std::string_view, kHaralickCount> kHaralickNames{
    "energy",          "contrast",           "correlation",        "variance",
    "idm",             "sum_average",        "sum_variance",       "sum_entropy",
    "entropy",         "difference_variance", "difference_entropy", "imc1",
    "imc2"};

class CooccurrenceMatrix {
 public:
  CooccurrenceMatrix(int levels, std::vector<double> p) : levels_(levels), p_(std::move(p)) {
    if (levels_ < 1 || p_.size() != static_cast<std::size_t>(levels_) * levels_) {
      fail(ErrorKind::InvalidInput, "co-occurrence matrix must be levels x levels");
    }
  }

  int levels() const { return levels_; }
  double operator()(int i, int j) const { return p_[static_cast<std::size_t>(i) * levels_ + j]; }
  std::span<const double> data() const { return p_; }

 private:
  int levels_;
  std::vector<double> p_;
};

// Offsets are folded so that each describes a unique undirected neighbour
// relation with dr >= 0.
inline Offset canonical(Offset o) {
  if (o.dr < 0 || (o.dr == 0 && o.dc < 0)) return {-o.dr, -o.dc};
  return o;
}

// Symmetric co-occurrence counts over every offset: each unordered
// neighbour pair (a, b) adds one to (a, b) and one to (b, a).
inline CooccurrenceMatrix glcm(const LevelView& grid, std::span<const Offset> offsets) {
  if (offsets.empty()) fail(ErrorKind::InvalidInput, "at least one offset is required");
  const int L = grid.levels;
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(L) * L, 0);
  std::uint64_t total = 0;
  for (const Offset raw : offsets) {
    const Offset o = canonical(raw);
    if (o.dr == 0 && o.dc == 0) fail(ErrorKind::InvalidInput, "zero offset");
    for (int r = 0; r + o.dr < grid.rows; ++r) {
      for (int c = std::max(0, -o.dc); c < grid.cols && c + o.dc < grid.cols; ++c) {
        const int a = grid.at(r, c);
        const int b = grid.at(r + o.dr, c + o.dc);
        ++counts[static_cast<std::size_t>(a) * L + b];
        ++counts[static_cast<std::size_t>(b) * L + a];
        total += 2;
      }
    }
  }
  if (total == 0) fail(ErrorKind::DegenerateInput, "region too small for any offset");
  std::vector<double> p(counts.size());
  const double denom = static_cast<double>(total);
  for (std::size_t k = 0; k < counts.size(); ++k) p[k] = static_cast<double>(counts[k]) / denom;
  return CooccurrenceMatrix(L, std::move(p));
}

inline CooccurrenceMatrix glcm(const QuantizedPatch& q, std::span<const Offset> offsets) {
  if (q.side() < 2) fail(ErrorKind::DegenerateInput, "patch side must be at least 2");
  return glcm(view_of(q), offsets);
}

/// The thirteen Haralick statistics of a normalized co-occurrence matrix.
///
/// Indices are zero-based gray levels. Entropies are in bits. The two
/// information measures of correlation follow the usual definitions, with
/// 1 - 2^(-2 (HXY2 - HXY)) for the second one, which equals the textbook
/// natural-log form. Correlation is 0 when either marginal has no spread,
/// and IMC1 is 0 when both marginal entropies vanish.
inline HaralickVector haralick13(const CooccurrenceMatrix& m) {
  const int L = m.levels();
  std::vector<double> px(L, 0.0), py(L, 0.0), psum(2 * L - 1, 0.0), pdiff(L, 0.0);
  double energy = 0.0, entropy = 0.0, idm = 0.0, ij_moment = 0.0;
  for (int i = 0; i < L; ++i) {
    for (int j = 0; j < L; ++j) {
      const double p = m(i, j);
      if (p == 0.0) continue;
      px[i] += p;
      py[j] += p;
      psum[i + j] += p;
      pdiff[std::abs(i - j)] += p;
      energy += p * p;
      entropy -= xlog2x(p);
      idm += p / (1.0 + static_cast<double>((i - j) * (i - j)));
      ij_moment += static_cast<double>(i) * j * p;
    }
  }

  double mu_x = 0.0, mu_y = 0.0;
  for (int i = 0; i < L; ++i) {
    mu_x += i * px[i];
    mu_y += i * py[i];
  }
  double var_x = 0.0, var_y = 0.0, hx = 0.0, hy = 0.0;
  for (int i = 0; i < L; ++i) {
    var_x += (i - mu_x) * (i - mu_x) * px[i];
    var_y += (i - mu_y) * (i - mu_y) * py[i];
    hx -= xlog2x(px[i]);
    hy -= xlog2x(py[i]);
  }

  double sum_avg = 0.0, sum_entropy = 0.0;
  for (int k = 0; k < 2 * L - 1; ++k) {
    sum_avg += k * psum[k];
    sum_entropy -= xlog2x(psum[k]);
  }
  double sum_var = 0.0;
  for (int k = 0; k < 2 * L - 1; ++k) sum_var += (k - sum_avg) * (k - sum_avg) * psum[k];

  double contrast = 0.0, diff_mean = 0.0, diff_entropy = 0.0;
  for (int k = 0; k < L; ++k) {
    contrast += static_cast<double>(k) * k * pdiff[k];
    diff_mean += k * pdiff[k];
    diff_entropy -= xlog2x(pdiff[k]);
  }
  double diff_var = 0.0;
  for (int k = 0; k < L; ++k) diff_var += (k - diff_mean) * (k - diff_mean) * pdiff[k];

  double hxy1 = 0.0, hxy2 = 0.0;
  for (int i = 0; i < L; ++i) {
    if (px[i] == 0.0) continue;
    for (int j = 0; j < L; ++j) {
      if (py[j] == 0.0) continue;
      const double outer = px[i] * py[j];
      const double log_outer = std::log2(outer);
      hxy1 -= m(i, j) * log_outer;
      hxy2 -= outer * log_outer;
    }
  }

  const double sigma = std::sqrt(var_x * var_y);
  const double correlation = sigma > 0.0 ? (ij_moment - mu_x * mu_y) / sigma : 0.0;
  const double hmax = std::max(hx, hy);
  const double imc1 = hmax > 0.0 ? (entropy - hxy1) / hmax : 0.0;
  const double imc2 = std::sqrt(std::max(0.0, 1.0 - std::exp2(-2.0 * (hxy2 - entropy))));

  return {energy,  contrast,    correlation, var_x,    idm,          sum_avg, sum_var,
          sum_entropy, entropy, diff_var,    diff_entropy, imc1, imc2};
}

}  // namespace pavetex
