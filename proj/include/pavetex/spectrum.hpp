#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <new>
#include <span>
#include <utility>
#include <vector>

#include "pavetex/error.hpp"

namespace pavetex {

namespace detail {

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

template <typename T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <typename T>
FftwBuffer<T> fftw_buffer(std::size_t n) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
  if (p == nullptr) throw std::bad_alloc();
  return FftwBuffer<T>(p);
}

// FFTW's planner is not re-entrant; executing an existing plan on fresh
// fftw_malloc'd buffers is. Plans are created once per shape and kept.
class RealPlanCache {
 public:
  static RealPlanCache& instance() {
    static RealPlanCache cache;
    return cache;
  }

  fftw_plan plan_for(int rows, int cols) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_pair(rows, cols);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    auto in = fftw_buffer<double>(static_cast<std::size_t>(rows) * cols);
    auto out = fftw_buffer<fftw_complex>(static_cast<std::size_t>(rows) * (cols / 2 + 1));
    fftw_plan plan = fftw_plan_dft_r2c_2d(rows, cols, in.get(), out.get(), FFTW_ESTIMATE);
    if (plan == nullptr) fail(ErrorKind::InvalidInput, "FFTW could not plan transform");
    plans_.emplace(key, plan);
    return plan;
  }

  ~RealPlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  RealPlanCache() = default;
  std::mutex mutex_;
  std::map<std::pair<int, int>, fftw_plan> plans_;
};

}  // namespace detail

/// Magnitudes |F(p,q)| of the 2-D DFT of a real rows x cols grid, with the
/// 1/(rows*cols) normalization, for every one of the rows*cols frequencies
/// (row-major, unshifted: F(0,0) is element 0).
inline std::vector<double> dft_magnitudes(std::span<const double> values, int rows, int cols) {
  if (rows < 1 || cols < 1 || values.size() != static_cast<std::size_t>(rows) * cols) {
    fail(ErrorKind::InvalidInput, "grid size mismatch");
  }
  const int half = cols / 2 + 1;
  auto in = detail::fftw_buffer<double>(values.size());
  auto out = detail::fftw_buffer<fftw_complex>(static_cast<std::size_t>(rows) * half);
  std::copy(values.begin(), values.end(), in.get());
  fftw_execute_dft_r2c(detail::RealPlanCache::instance().plan_for(rows, cols), in.get(), out.get());

  const double norm = 1.0 / (static_cast<double>(rows) * cols);
  std::vector<double> mags(values.size());
  for (int p = 0; p < rows; ++p) {
    for (int q = 0; q < cols; ++q) {
      // Hermitian symmetry: F(p, q) = conj(F(-p, -q)).
      const bool stored = q < half;
      const int sp = stored ? p : (rows - p) % rows;
      const int sq = stored ? q : cols - q;
      const fftw_complex& z = out[static_cast<std::size_t>(sp) * half + sq];
      mags[static_cast<std::size_t>(p) * cols + q] = std::hypot(z[0], z[1]) * norm;
    }
  }
  return mags;
}

}  // namespace pavetex
