#pragma once

// Slow, direct references for the statistics and learners.

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

// P(s+ > s-) + 1/2 P(s+ = s-) as an exact ratio of pair counts.
inline double pair_auc(const std::vector<double>& s, const std::vector<int>& y) {
  std::int64_t twice = 0, pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] <= 0) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] > 0) continue;
      ++pairs;
      twice += s[i] > s[j] ? 2 : s[i] == s[j] ? 1 : 0;
    }
  }
  return static_cast<double>(twice) / static_cast<double>(2 * pairs);
}

// Two-sided rank-sum p by enumerating every assignment of the pooled
// mid-ranks to the first sample.
inline double ranksum_enumerated(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pool(a);
  pool.insert(pool.end(), b.begin(), b.end());
  const std::size_t n = pool.size();
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n; ++i) {
    double less = 0, equal = 0;
    for (double v : pool) less += v < pool[i], equal += v == pool[i];
    rank[i] = less + (equal + 1) / 2;
  }
  double observed = 0;
  for (std::size_t i = 0; i < a.size(); ++i) observed += rank[i];

  std::vector<bool> pick(n, false);
  std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(a.size()), true);
  double lo = 0, hi = 0, total = 0;
  do {
    double w = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (pick[i]) w += rank[i];
    total += 1;
    lo += w <= observed + 1e-9;
    hi += w >= observed - 1e-9;
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return std::min(1.0, 2 * std::min(lo, hi) / total);
}

// Minimizes a convex function of one variable on [lo, hi].
inline double golden_min(const std::function<double(double)>& f, double lo, double hi, double& arg, int iters = 90) {
  const double r = (std::sqrt(5.0) - 1) / 2;
  double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters; ++i) {
    if (f1 <= f2) {
      hi = x2, x2 = x1, f2 = f1;
      x1 = hi - r * (hi - lo), f1 = f(x1);
    } else {
      lo = x1, x1 = x2, f1 = f2;
      x2 = lo + r * (hi - lo), f2 = f(x2);
    }
  }
  arg = f1 <= f2 ? x1 : x2;
  return std::min(f1, f2);
}

// Primal soft-margin objective for 2-D data.
inline double svm_primal(const std::vector<std::array<double, 2>>& x, const std::vector<int>& y, double C, double w0,
                         double w1, double b) {
  double hinge = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    hinge += std::max(0.0, 1 - y[i] * (w0 * x[i][0] + w1 * x[i][1] + b));
  return 0.5 * (w0 * w0 + w1 * w1) + C * hinge;
}

// Nested golden-section search over (w0, w1, b). The objective is convex,
// so every partial minimum is convex in the remaining variables.
inline double svm_reference_objective(const std::vector<std::array<double, 2>>& x, const std::vector<int>& y,
                                      double C) {
  const double wmax = std::sqrt(2 * C * x.size()) + 1;
  double radius = 0;
  for (const auto& p : x) radius = std::max(radius, std::hypot(p[0], p[1]));
  const double bmax = 1 + wmax * radius + 1;
  double arg = 0;
  return golden_min(
      [&](double w0) {
        double a1 = 0;
        return golden_min(
            [&](double w1) {
              double a2 = 0;
              return golden_min([&](double b) { return svm_primal(x, y, C, w0, w1, b); }, -bmax, bmax, a2, 70);
            },
            -wmax, wmax, a1, 70);
      },
      -wmax, wmax, arg, 70);
}

// Platt's smoothed-target negative log-likelihood, written out plainly.
inline double platt_nll(const std::vector<double>& s, const std::vector<int>& y, double a, double b) {
  double np = 0, nn = 0;
  for (int v : y) (v > 0 ? np : nn) += 1;
  const double hi = (np + 1) / (np + 2), lo = 1 / (nn + 2);
  double f = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double t = y[i] > 0 ? hi : lo;
    const double p = 1 / (1 + std::exp(a * s[i] + b));
    f -= t * std::log(p) + (1 - t) * std::log(1 - p);
  }
  return f;
}

// Leading eigenvalues of a symmetric matrix by power iteration with deflation.
inline std::vector<double> eigenvalues_by_power(Eigen::MatrixXd A, int count) {
  std::vector<double> out;
  for (int k = 0; k < count; ++k) {
    Eigen::VectorXd v = Eigen::VectorXd::Ones(A.rows());
    for (Eigen::Index i = 0; i < A.rows(); ++i) v(i) += 0.01 * static_cast<double>(i);
    double lambda = 0;
    for (int it = 0; it < 20000; ++it) {
      Eigen::VectorXd w = A * v;
      const double nrm = w.norm();
      if (nrm == 0) break;
      w /= nrm;
      lambda = w.dot(A * w);
      if ((w - v).norm() < 1e-14) {
        v = w;
        break;
      }
      v = w;
    }
    out.push_back(lambda);
    A -= lambda * v * v.transpose();
  }
  return out;
}

// Nearest class centroid.
inline int nearest_centroid(const std::vector<Eigen::VectorXd>& centroids, const Eigen::VectorXd& x) {
  int best = 0;
  for (std::size_t k = 1; k < centroids.size(); ++k)
    if ((centroids[k] - x).norm() < (centroids[best] - x).norm()) best = static_cast<int>(k);
  return best;
}

}  // namespace oracle
