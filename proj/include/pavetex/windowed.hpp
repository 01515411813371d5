#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <span>
#include <vector>

#include "pavetex/cooccurrence.hpp"
#include "pavetex/error.hpp"

namespace pavetex {

namespace detail {

// Sliding-window co-occurrence statistics.
//
// A window's symmetric co-occurrence matrix is described by
//   * pair counts per unordered cell (a <= b), from which the joint entropy
//     and sum of squared entries are maintained incrementally. The joint
//     sum of c*log2(c) is held in 64-bit fixed point so a window's value
//     never depends on the path taken to reach it;
//   * linear histograms (marginal, sum, |difference|) and the i*j moment,
//     which are sums over "owner columns" and slide by adding one column
//     vector and subtracting another.
//
// Offsets are canonical (dr >= 0). A pair's owner column is the smaller of
// its two columns; with span = |dc| the window starting at column c0 holds
// exactly the pairs with owner column in [c0, c0 + w - 1 - span].
class WindowEngine {
 public:
  WindowEngine(const LevelView& grid, int window, std::vector<Offset> offsets)
      : grid_(grid), w_(window), L_(grid.levels), offsets_(std::move(offsets)) {
    lin_size_ = 4 * L_;  // marginal | sum | difference | i*j moment
    cells_ = L_ + L_ * (L_ - 1) / 2;

    std::int64_t pairs = 0;
    for (const Offset o : offsets_) pairs += static_cast<std::int64_t>(w_ - o.dr) * (w_ - std::abs(o.dc));
    total_ = 2 * pairs;
    max_cell_pairs_ = pairs;
    // The i*j moment of a whole window must fit the 32-bit column vectors.
    if (static_cast<double>(total_) * (L_ - 1) * (L_ - 1) >= 2147483647.0) {
      fail(ErrorKind::DegenerateInput, "window too large for the number of levels");
    }

    std::map<int, int> span_slot;
    for (const Offset o : offsets_) span_slot.emplace(std::abs(o.dc), 0);
    for (auto& [span, slot] : span_slot) {
      slot = static_cast<int>(spans_.size());
      spans_.push_back(span);
    }
    for (const Offset o : offsets_) offset_slot_.push_back(span_slot[std::abs(o.dc)]);

    build_tables();
    build_codes();
  }

  template <typename Sink>
  void run(Sink&& sink) {
    const int R = grid_.rows, C = grid_.cols;
    const std::size_t col_stride = static_cast<std::size_t>(lin_size_);
    col_lin_.assign(spans_.size() * static_cast<std::size_t>(C) * col_stride, 0);

    // Column vectors for the first band of rows.
    for (std::size_t k = 0; k < offsets_.size(); ++k) {
      const Offset o = offsets_[k];
      for (int r = 0; r < w_ - o.dr; ++r) {
        for (int ac = std::max(0, -o.dc); ac < C && ac + o.dc < C; ++ac) column_pair<1>(k, r, ac);
      }
    }

    cnt_.assign(static_cast<std::size_t>(cells_), 0);
    std::vector<std::int32_t> lin(static_cast<std::size_t>(lin_size_));

    for (int r0 = 0; r0 + w_ <= R; ++r0) {
      if (r0 > 0) {
        for (std::size_t k = 0; k < offsets_.size(); ++k) {
          const Offset o = offsets_[k];
          for (int ac = std::max(0, -o.dc); ac < C && ac + o.dc < C; ++ac) {
            column_pair<-1>(k, r0 - 1, ac);
            column_pair<1>(k, r0 + w_ - 1 - o.dr, ac);
          }
        }
      }

      // First window of the row, built from scratch.
      std::fill(cnt_.begin(), cnt_.begin() + L_, 0);
      std::fill(cnt_.begin() + L_, cnt_.end(), static_cast<std::int32_t>(delta_stride_));
      joint_ = 0;
      squares_ = 0;
      std::fill(lin.begin(), lin.end(), 0);
      for (std::size_t k = 0; k < offsets_.size(); ++k) {
        const Offset o = offsets_[k];
        const int first = std::max(0, -o.dc);
        for (int ac = first; ac < first + w_ - std::abs(o.dc); ++ac) {
          const std::uint16_t* codes = code_column(k, ac) + r0;
          for (int r = 0; r < w_ - o.dr; ++r) add_cell(codes[r]);
        }
      }
      for (std::size_t s = 0; s < spans_.size(); ++s) {
        for (int x = 0; x < w_ - spans_[s]; ++x) {
          const std::int32_t* v = lin_column(s, x);
          for (int i = 0; i < lin_size_; ++i) lin[i] += v[i];
        }
      }
      sink(r0, 0, features(lin));

      for (int c0 = 0; c0 + w_ < C; ++c0) {
        for (std::size_t k = 0; k < offsets_.size(); ++k) {
          const Offset o = offsets_[k];
          const int span = std::abs(o.dc);
          const int shift = std::max(0, -o.dc);
          const std::uint16_t* leaving = code_column(k, c0 + shift) + r0;
          const std::uint16_t* entering = code_column(k, c0 + w_ - span + shift) + r0;
          const int n = w_ - o.dr;
          for (int r = 0; r < n; ++r) {
            remove_cell(leaving[r]);
            add_cell(entering[r]);
          }
        }
        for (std::size_t s = 0; s < spans_.size(); ++s) {
          slide(lin.data(), lin_column(s, c0 + w_ - spans_[s]), lin_column(s, c0));
        }
        sink(r0, c0 + 1, features(lin));
      }
    }
  }

 private:
  struct Delta {
    std::int64_t joint;
    std::int64_t squares;
  };

  void build_tables() {
    const std::int64_t T = total_;
    xlogx_.resize(static_cast<std::size_t>(T) + 1);
    for (std::int64_t c = 0; c <= T; ++c) xlogx_[c] = xlog2x(static_cast<double>(c));
    // Every partial joint sum is bounded by T*log2(T); keep two bits of headroom.
    const int exponent = 61 - static_cast<int>(std::ceil(std::log2(xlogx_.back() + 2.0)));
    scale_ = std::ldexp(1.0, exponent);
    auto fixed = [&](std::int64_t c) { return std::llround(xlogx_[c] * scale_); };
    fixed_total_ = fixed(T);

    // Diagonal cells hold 2n matrix entries for n pairs; off-diagonal cells
    // hold n entries twice, at (a,b) and (b,a).
    const std::size_t n_max = static_cast<std::size_t>(max_cell_pairs_);
    delta_stride_ = n_max + 1;
    deltas_.resize(2 * delta_stride_);
    for (std::size_t n = 0; n < n_max; ++n) {
      const auto ni = static_cast<std::int64_t>(n);
      deltas_[n] = {fixed(2 * ni + 2) - fixed(2 * ni), 4 * (2 * ni + 1)};
      deltas_[delta_stride_ + n] = {2 * (fixed(ni + 1) - fixed(ni)), 2 * (2 * ni + 1)};
    }

    idm_weight_.resize(L_);
    for (int k = 0; k < L_; ++k) idm_weight_[k] = 1.0 / (1.0 + static_cast<double>(k) * k);
  }

  int cell_of(int a, int b) const {
    if (a > b) std::swap(a, b);
    if (a == b) return a;
    return L_ + a * (2 * L_ - a - 1) / 2 + (b - a - 1);
  }

  // Transposed (column-major) cell codes of every anchored pair, per offset.
  void build_codes() {
    const int R = grid_.rows, C = grid_.cols;
    codes_.resize(offsets_.size());
    for (std::size_t k = 0; k < offsets_.size(); ++k) {
      const Offset o = offsets_[k];
      auto& codes = codes_[k];
      codes.assign(static_cast<std::size_t>(R) * C, 0);
      for (int ac = std::max(0, -o.dc); ac < C && ac + o.dc < C; ++ac) {
        for (int r = 0; r + o.dr < R; ++r) {
          codes[static_cast<std::size_t>(ac) * R + r] =
              static_cast<std::uint16_t>(cell_of(grid_.at(r, ac), grid_.at(r + o.dr, ac + o.dc)));
        }
      }
    }
  }

  const std::uint16_t* code_column(std::size_t k, int ac) const {
    return codes_[k].data() + static_cast<std::size_t>(ac) * grid_.rows;
  }

  std::int32_t* lin_column(std::size_t slot, int x) {
    return col_lin_.data() + (slot * grid_.cols + static_cast<std::size_t>(x)) * lin_size_;
  }

  void slide(std::int32_t* __restrict acc, const std::int32_t* __restrict in,
             const std::int32_t* __restrict out) const {
    for (int i = 0; i < lin_size_; ++i) acc[i] += in[i] - out[i];
  }

  template <int Sign>
  void column_pair(std::size_t k, int r, int ac) {
    const Offset o = offsets_[k];
    const int a = grid_.at(r, ac);
    const int b = grid_.at(r + o.dr, ac + o.dc);
    const int owner = ac + std::min(0, o.dc);
    const std::size_t slot = static_cast<std::size_t>(offset_slot_[k]);
    std::int32_t* v = lin_column(slot, owner);
    v[a] += Sign;
    v[b] += Sign;
    v[L_ + a + b] += 2 * Sign;
    v[3 * L_ - 1 + std::abs(a - b)] += 2 * Sign;
    v[4 * L_ - 1] += 2 * Sign * a * b;
  }

  // cnt_ holds each cell's pair count already offset to its row of the
  // delta table, so one load gives both.
  void add_cell(std::uint16_t cell) {
    const std::int32_t n = cnt_[cell];
    const Delta& d = deltas_[static_cast<std::size_t>(n)];
    joint_ += d.joint;
    squares_ += d.squares;
    cnt_[cell] = n + 1;
  }

  void remove_cell(std::uint16_t cell) {
    const std::int32_t n = cnt_[cell] - 1;
    const Delta& d = deltas_[static_cast<std::size_t>(n)];
    joint_ -= d.joint;
    squares_ -= d.squares;
    cnt_[cell] = n;
  }

  HaralickVector features(std::span<const std::int32_t> lin) const {
    const std::int64_t T = total_;
    const double t = static_cast<double>(T);
    const double t2 = t * t;
    const double log_total = xlogx_[T];
    const std::int32_t* m = lin.data();
    const std::int32_t* s = m + L_;
    const std::int32_t* d = s + 2 * L_ - 1;
    const std::int64_t ij = d[L_];

    double hm = 0.0;
    std::int64_t s_im = 0, s_i2m = 0;
    for (int i = 0; i < L_; ++i) {
      hm += xlogx_[m[i]];
      s_im += static_cast<std::int64_t>(i) * m[i];
      s_i2m += static_cast<std::int64_t>(i) * i * m[i];
    }
    double hs = 0.0;
    for (int k = 0; k < 2 * L_ - 1; ++k) hs += xlogx_[s[k]];
    double hd = 0.0, idm = 0.0;
    std::int64_t s_kd = 0;
    for (int k = 0; k < L_; ++k) {
      hd += xlogx_[d[k]];
      idm += idm_weight_[k] * static_cast<double>(d[k]);
      s_kd += static_cast<std::int64_t>(k) * d[k];
    }
    // Moments of the sum/difference distributions follow from the marginal
    // moments and sum(i*j*c): E[(i+j)^k] and E[(i-j)^2] expand directly.
    const std::int64_t s_ks = 2 * s_im;
    const std::int64_t s_k2s = 2 * s_i2m + 2 * ij;
    const std::int64_t s_k2d = 2 * s_i2m - 2 * ij;

    const std::int64_t var_num = T * s_i2m - s_im * s_im;
    const std::int64_t cov_num = T * ij - s_im * s_im;

    const double entropy = static_cast<double>(fixed_total_ - joint_) / scale_ / t;
    const double hx = (log_total - hm) / t;
    const double hxy12 = 2.0 * hx;  // HXY1 = HXY2 = HX + HY for symmetric counts

    HaralickVector f;
    f[kEnergy] = static_cast<double>(squares_) / t2;
    f[kContrast] = static_cast<double>(s_k2d) / t;
    f[kCorrelation] = var_num != 0 ? static_cast<double>(cov_num) / static_cast<double>(var_num) : 0.0;
    f[kVariance] = static_cast<double>(var_num) / t2;
    f[kInverseDifferenceMoment] = idm / t;
    f[kSumAverage] = static_cast<double>(s_ks) / t;
    f[kSumVariance] = static_cast<double>(T * s_k2s - s_ks * s_ks) / t2;
    f[kSumEntropy] = (log_total - hs) / t;
    f[kEntropy] = entropy;
    f[kDifferenceVariance] = static_cast<double>(T * s_k2d - s_kd * s_kd) / t2;
    f[kDifferenceEntropy] = (log_total - hd) / t;
    f[kInformationCorrelation1] = hx > 0.0 ? (entropy - hxy12) / hx : 0.0;
    f[kInformationCorrelation2] = std::sqrt(std::max(0.0, 1.0 - std::exp2(-2.0 * (hxy12 - entropy))));
    return f;
  }

  const LevelView& grid_;
  int w_;
  int L_;
  std::vector<Offset> offsets_;
  std::vector<int> spans_;
  std::vector<int> offset_slot_;
  int lin_size_ = 0;
  int cells_ = 0;
  std::int64_t total_ = 0;
  std::int64_t max_cell_pairs_ = 0;

  std::vector<double> xlogx_;
  std::vector<Delta> deltas_;
  std::size_t delta_stride_ = 0;
  std::vector<double> idm_weight_;
  double scale_ = 1.0;
  std::int64_t fixed_total_ = 0;

  std::vector<std::vector<std::uint16_t>> codes_;
  std::vector<std::int32_t> col_lin_;

  std::vector<std::int32_t> cnt_;
  std::int64_t joint_ = 0;
  std::int64_t squares_ = 0;
};

}  // namespace detail

/// Visits every position where a full `window` x `window` square fits inside
/// `grid` and hands the Haralick vector of that square's co-occurrence
/// matrix to `sink(row, col, features)`. Row/col index the top-left corner,
/// which is also the index of the window centre in the interior map.
template <typename Sink>
void for_each_window_haralick(const LevelView& grid, int window, std::span<const Offset> offsets, Sink&& sink) {
  if (window < 2) fail(ErrorKind::DegenerateInput, "window must be at least 2");
  if (window > grid.rows || window > grid.cols) fail(ErrorKind::DegenerateInput, "window larger than region");
  if (offsets.empty()) fail(ErrorKind::InvalidInput, "at least one offset is required");
  if (grid.levels < 1 || grid.levels > 256) fail(ErrorKind::InvalidQuantization, "levels must lie in [1, 256]");

  std::vector<Offset> offs;
  offs.reserve(offsets.size());
  for (const Offset raw : offsets) {
    const Offset o = canonical(raw);
    if (o.dr == 0 && o.dc == 0) fail(ErrorKind::InvalidInput, "zero offset");
    if (o.dr >= window || std::abs(o.dc) >= window) fail(ErrorKind::DegenerateInput, "offset does not fit in window");
    offs.push_back(o);
  }
  detail::WindowEngine engine(grid, window, std::move(offs));
  engine.run(std::forward<Sink>(sink));
}

// One map per Haralick statistic over the window interior.
struct HaralickMaps {
  int rows = 0;
  int cols = 0;
  std::array<std::vector<double>, kHaralickCount> maps;
};

inline HaralickMaps windowed_haralick_maps(const LevelView& grid, int window, std::span<const Offset> offsets) {
  HaralickMaps out;
  out.rows = grid.rows - window + 1;
  out.cols = grid.cols - window + 1;
  if (out.rows < 1 || out.cols < 1) fail(ErrorKind::DegenerateInput, "window larger than region");
  for (auto& m : out.maps) m.resize(static_cast<std::size_t>(out.rows) * out.cols);
  for_each_window_haralick(grid, window, offsets, [&](int r, int c, const HaralickVector& f) {
    const std::size_t idx = static_cast<std::size_t>(r) * out.cols + c;
    for (std::size_t k = 0; k < kHaralickCount; ++k) out.maps[k][idx] = f[k];
  });
  return out;
}

}  // namespace pavetex
