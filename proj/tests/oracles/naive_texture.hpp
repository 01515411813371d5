#pragma once

// Brute-force texture references. Nothing here calls into the library's
// co-occurrence, windowing or statistics code.

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

namespace oracle {

struct Grid {
  int rows = 0;
  int cols = 0;
  int levels = 0;
  std::vector<int> v;
  int at(int r, int c) const { return v[static_cast<std::size_t>(r) * cols + c]; }
};

using Matrix2 = std::vector<std::vector<double>>;

inline Grid quantize(const std::vector<std::uint8_t>& pixels, int side, int levels) {
  Grid g{side, side, levels, {}};
  for (auto p : pixels) g.v.push_back(static_cast<int>(std::floor(p * levels / 256.0)));
  return g;
}

using Offsets = std::vector<std::array<int, 2>>;

// Symmetric normalized GLCM of the h x w block at (r0, c0); by default the
// 0/45/90/135 degree neighbours.
inline Matrix2 glcm(const Grid& g, int r0, int c0, int h, int w, const Offsets& offs = {{0, 1}, {1, 0}, {1, 1}, {1, -1}}) {
  Matrix2 m(g.levels, std::vector<double>(g.levels, 0.0));
  double total = 0.0;
  for (const auto& o : offs) {
    for (int r = r0; r < r0 + h; ++r) {
      for (int c = c0; c < c0 + w; ++c) {
        const int r2 = r + o[0], c2 = c + o[1];
        if (r2 < r0 || r2 >= r0 + h || c2 < c0 || c2 >= c0 + w) continue;
        m[g.at(r, c)][g.at(r2, c2)] += 1.0;
        m[g.at(r2, c2)][g.at(r, c)] += 1.0;
        total += 2.0;
      }
    }
  }
  for (auto& row : m)
    for (auto& x : row) x /= total;
  return m;
}

// Haralick's thirteen, straight from the definitions. Entropies in bits
// except the IMC2 exponent, which uses nats as in the original form.
inline std::array<double, 13> haralick(const Matrix2& p) {
  const int L = static_cast<int>(p.size());
  auto lg = [](double x) { return std::log2(x); };
  std::vector<double> px(L, 0.0), py(L, 0.0), psum(2 * L - 1, 0.0), pdiff(L, 0.0);
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) {
      px[i] += p[i][j];
      py[j] += p[i][j];
      psum[i + j] += p[i][j];
      pdiff[std::abs(i - j)] += p[i][j];
    }
  double mx = 0, my = 0;
  for (int i = 0; i < L; ++i) mx += i * px[i], my += i * py[i];
  double sx = 0, sy = 0;
  for (int i = 0; i < L; ++i) sx += (i - mx) * (i - mx) * px[i], sy += (i - my) * (i - my) * py[i];

  double asm_ = 0, con = 0, cov = 0, var = 0, idm = 0, hxy = 0, hxy_nat = 0;
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) {
      const double v = p[i][j];
      asm_ += v * v;
      con += (i - j) * (i - j) * v;
      cov += (i - mx) * (j - my) * v;
      var += (i - mx) * (i - mx) * v;
      idm += v / (1.0 + (i - j) * (i - j));
      if (v > 0) hxy -= v * lg(v), hxy_nat -= v * std::log(v);
    }
  const double corr = (sx > 0 && sy > 0) ? cov / std::sqrt(sx * sy) : 0.0;

  double savg = 0, sent = 0;
  for (int k = 0; k < 2 * L - 1; ++k) {
    savg += k * psum[k];
    if (psum[k] > 0) sent -= psum[k] * lg(psum[k]);
  }
  double svar = 0;
  for (int k = 0; k < 2 * L - 1; ++k) svar += (k - savg) * (k - savg) * psum[k];

  double dmean = 0, dent = 0;
  for (int k = 0; k < L; ++k) {
    dmean += k * pdiff[k];
    if (pdiff[k] > 0) dent -= pdiff[k] * lg(pdiff[k]);
  }
  double dvar = 0;
  for (int k = 0; k < L; ++k) dvar += (k - dmean) * (k - dmean) * pdiff[k];

  double hx = 0, hy = 0, hxy1 = 0, hxy2_nat = 0;
  for (int i = 0; i < L; ++i) {
    if (px[i] > 0) hx -= px[i] * lg(px[i]);
    if (py[i] > 0) hy -= py[i] * lg(py[i]);
  }
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) {
      const double q = px[i] * py[j];
      if (q <= 0) continue;
      hxy1 -= p[i][j] * lg(q);
      hxy2_nat -= q * std::log(q);
    }
  const double hm = std::max(hx, hy);
  const double imc1 = hm > 0 ? (hxy - hxy1) / hm : 0.0;
  const double imc2 = std::sqrt(std::max(0.0, 1.0 - std::exp(-2.0 * (hxy2_nat - hxy_nat))));
  return {asm_, con, corr, var, idm, savg, svar, sent, hxy, dvar, dent, imc1, imc2};
}

// Mean of per-window Haralick vectors over every full window.
inline std::array<double, 13> windowed_mean(const Grid& g, int window) {
  std::array<double, 13> acc{};
  int count = 0;
  for (int r = 0; r + window <= g.rows; ++r)
    for (int c = 0; c + window <= g.cols; ++c) {
      const auto f = haralick(glcm(g, r, c, window, window));
      for (int k = 0; k < 13; ++k) acc[k] += f[k];
      ++count;
    }
  for (auto& a : acc) a /= count;
  return acc;
}

inline std::array<double, 13> vh(const std::vector<std::uint8_t>& pixels, int side, int window, int levels) {
  return windowed_mean(quantize(pixels, side, levels), window);
}

// [mean, median, population std, skewness, excess kurtosis]; spread below
// 1e-12 relative counts as none.
inline std::array<double, 5> five_stats(std::vector<double> x) {
  const long double n = static_cast<long double>(x.size());
  long double s = 0;
  for (double v : x) s += v;
  const long double mean = s / n;
  long double m2 = 0, m3 = 0, m4 = 0;
  for (double v : x) {
    const long double d = v - mean;
    m2 += d * d, m3 += d * d * d, m4 += d * d * d * d;
  }
  m2 /= n, m3 /= n, m4 /= n;
  std::sort(x.begin(), x.end());
  const std::size_t h = x.size() / 2;
  const double median = x.size() % 2 ? x[h] : 0.5 * (x[h - 1] + x[h]);
  const double fl = 1e-12 * std::max(1.0L, std::fabs(mean));
  if (m2 <= fl * fl) return {static_cast<double>(mean), median, 0.0, 0.0, 0.0};
  const long double sd = std::sqrt(m2);
  return {static_cast<double>(mean), median, static_cast<double>(sd), static_cast<double>(m3 / (sd * sd * sd)),
          static_cast<double>(m4 / (m2 * m2) - 3.0L)};
}

// Central differences inside, one-sided on the border.
inline void gradients(const std::vector<std::uint8_t>& px, int n, std::vector<double>& gx, std::vector<double>& gy) {
  gx.assign(px.size(), 0.0);
  gy.assign(px.size(), 0.0);
  auto at = [&](int r, int c) { return static_cast<double>(px[static_cast<std::size_t>(r) * n + c]); };
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * n + c;
      gx[i] = c == 0 ? at(r, 1) - at(r, 0) : c == n - 1 ? at(r, c) - at(r, c - 1) : (at(r, c + 1) - at(r, c - 1)) / 2;
      gy[i] = r == 0 ? at(1, c) - at(0, c) : r == n - 1 ? at(r, c) - at(r - 1, c) : (at(r + 1, c) - at(r - 1, c)) / 2;
    }
}

// Dominant orientation per full window: angle of the top eigenvector of
// G^T G, where G stacks the window's gradient rows. -1 marks a window
// without gradient.
inline std::vector<double> orientations(const std::vector<std::uint8_t>& px, int n, int window, int& out_side) {
  std::vector<double> gx, gy;
  gradients(px, n, gx, gy);
  out_side = n - window + 1;
  std::vector<double> theta;
  for (int r = 0; r < out_side; ++r)
    for (int c = 0; c < out_side; ++c) {
      Eigen::MatrixXd G(window * window, 2);
      int k = 0;
      for (int a = r; a < r + window; ++a)
        for (int b = c; b < c + window; ++b, ++k) {
          G(k, 0) = gx[static_cast<std::size_t>(a) * n + b];
          G(k, 1) = gy[static_cast<std::size_t>(a) * n + b];
        }
      const Eigen::Matrix2d T = G.transpose() * G;
      if (T.trace() == 0.0) {
        theta.push_back(-1.0);
        continue;
      }
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(T);
      const Eigen::Vector2d v = es.eigenvectors().col(1);
      double t = std::atan2(v(1), v(0));
      while (t < 0) t += std::numbers::pi;
      while (t >= std::numbers::pi) t -= std::numbers::pi;
      theta.push_back(t);
    }
  return theta;
}

inline std::array<double, 65> vc(const std::vector<std::uint8_t>& px, int n, int window, int bins) {
  int side = 0;
  const auto theta = orientations(px, n, window, side);
  Grid g{side, side, bins, {}};
  for (double t : theta) {
    const double a = t < 0 ? 0.0 : t;
    g.v.push_back(std::min(bins - 1, static_cast<int>(std::floor(a / std::numbers::pi * bins))));
  }
  std::array<std::vector<double>, 13> maps;
  for (int r = 0; r + window <= side; ++r)
    for (int c = 0; c + window <= side; ++c) {
      const auto f = haralick(glcm(g, r, c, window, window));
      for (int k = 0; k < 13; ++k) maps[k].push_back(f[k]);
    }
  std::array<double, 65> out{};
  for (int k = 0; k < 13; ++k) {
    const auto s = five_stats(maps[k]);
    for (int j = 0; j < 5; ++j) out[5 * k + j] = s[j];
  }
  return out;
}

// |F(u,v)| / n^2 by direct summation.
inline std::vector<double> dft_magnitudes(const std::vector<double>& x, int n) {
  std::vector<double> out;
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v) {
      std::complex<long double> acc = 0;
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
          const long double ang = -2.0L * std::numbers::pi_v<long double> * ((long double)u * r + (long double)v * c) / n;
          acc += std::polar<long double>(x[static_cast<std::size_t>(r) * n + c], ang);
        }
      out.push_back(static_cast<double>(std::abs(acc)) / (static_cast<double>(n) * n));
    }
  return out;
}

}  // namespace oracle
