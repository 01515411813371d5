#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace pavetex {

// Population moments of a sample. Skewness and excess kurtosis are 0 when
// the sample has no spread.
struct Moments {
  double mean = 0.0;
  double median = 0.0;
  double stddev = 0.0;
  double skewness = 0.0;
  double kurtosis = 0.0;
};

inline double median_of(std::vector<double> values);

namespace detail {

// Elements of ranks k and k + 1 (0-based) for k + 1 < size: one bucketing
// pass over the value range, then selection inside the buckets holding those
// ranks. Bucketing is monotone in the value, so bucket order is value order.
inline std::pair<double, double> select_adjacent(std::span<const double> values, std::size_t k) {
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it, hi = *hi_it;
  if (!(hi > lo)) return {lo, lo};
  constexpr int kBuckets = 4096;
  const double scale = kBuckets / (hi - lo);
  std::vector<std::int32_t> bucket(values.size());
  std::vector<std::uint32_t> hist(kBuckets, 0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    bucket[i] = std::min(kBuckets - 1, static_cast<std::int32_t>((values[i] - lo) * scale));
    ++hist[static_cast<std::size_t>(bucket[i])];
  }
  std::int32_t first = 0;
  std::size_t below = 0;
  while (below + hist[static_cast<std::size_t>(first)] <= k) below += hist[static_cast<std::size_t>(first++)];
  // Rank k + 1 is either in the same bucket or the next non-empty one.
  std::int32_t last = first;
  if (below + hist[static_cast<std::size_t>(first)] == k + 1) {
    ++last;
    while (hist[static_cast<std::size_t>(last)] == 0) ++last;
  }
  std::vector<double> inside;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (bucket[i] >= first && bucket[i] <= last) inside.push_back(values[i]);
  }
  const auto pos = inside.begin() + static_cast<std::ptrdiff_t>(k - below);
  std::nth_element(inside.begin(), pos, inside.end());
  return {*pos, *std::min_element(pos + 1, inside.end())};
}

}  // namespace detail

inline double median_of(std::span<const double> values) {
  if (values.size() < 4096) return median_of(std::vector<double>(values.begin(), values.end()));
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return detail::select_adjacent(values, mid - 1).second;
  const auto [lower, upper] = detail::select_adjacent(values, mid - 1);
  return 0.5 * (lower + upper);
}

inline double median_of(std::vector<double> values) {
  if (values.empty()) return 0.0;
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

// Spread below this fraction of the magnitude is rounding noise, not signal.
inline constexpr double kRelativeSpreadFloor = 1e-12;

inline Moments moments_of(std::span<const double> values) {
  Moments out;
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / n;

  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : values) {
    const double d = v - out.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  out.median = median_of(values);

  const double floor = kRelativeSpreadFloor * std::max(1.0, std::abs(out.mean));
  if (m2 <= floor * floor) return out;
  out.stddev = std::sqrt(m2);
  out.skewness = m3 / (m2 * out.stddev);
  out.kurtosis = m4 / (m2 * m2) - 3.0;
  return out;
}

// Moments of a sample of small non-negative integers given as counts per value.
template <typename Count>
Moments moments_of_counts(std::span<const Count> counts) {
  Moments out;
  double n = 0.0, sum = 0.0;
  for (std::size_t v = 0; v < counts.size(); ++v) {
    n += static_cast<double>(counts[v]);
    sum += static_cast<double>(counts[v]) * static_cast<double>(v);
  }
  if (n == 0.0) return out;
  out.mean = sum / n;

  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (std::size_t v = 0; v < counts.size(); ++v) {
    const double w = static_cast<double>(counts[v]);
    const double d = static_cast<double>(v) - out.mean;
    const double d2 = d * d;
    m2 += w * d2;
    m3 += w * d2 * d;
    m4 += w * d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;

  // Values at ranks total/2 and (total-1)/2.
  const auto total = static_cast<std::uint64_t>(n);
  auto value_at = [&](std::uint64_t rank) {
    std::uint64_t seen = 0;
    for (std::size_t v = 0; v < counts.size(); ++v) {
      seen += static_cast<std::uint64_t>(counts[v]);
      if (seen > rank) return static_cast<double>(v);
    }
    return static_cast<double>(counts.size() - 1);
  };
  out.median = 0.5 * (value_at((total - 1) / 2) + value_at(total / 2));

  const double floor = kRelativeSpreadFloor * std::max(1.0, std::abs(out.mean));
  if (m2 <= floor * floor) return out;
  out.stddev = std::sqrt(m2);
  out.skewness = m3 / (m2 * out.stddev);
  out.kurtosis = m4 / (m2 * m2) - 3.0;
  return out;
}

// x * log2(x) with 0 log 0 = 0.
inline double xlog2x(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

// Shannon entropy in bits of a histogram given by raw counts.
template <typename Count>
double entropy_bits(std::span<const Count> counts) {
  double total = 0.0;
  for (auto c : counts) total += static_cast<double>(c);
  if (total <= 0.0) return 0.0;
  double acc = 0.0;
  for (auto c : counts) acc += xlog2x(static_cast<double>(c));
  return (xlog2x(total) - acc) / total;
}

}  // namespace pavetex
