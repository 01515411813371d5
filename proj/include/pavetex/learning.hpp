#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pavetex/error.hpp"
#include "pavetex/rng.hpp"
#include "pavetex/stats.hpp"
#include "pavetex/texture.hpp"

namespace pavetex {

using Matrix = Eigen::MatrixXd;  // rows are samples
using Vector = Eigen::VectorXd;

struct LabeledSample {
  FeatureVector features;
  std::string label;
  std::string city;
  std::string frame_id;
  double timestamp = 0.0;
};

inline Matrix feature_matrix(std::span<const LabeledSample> samples) {
  Matrix X(static_cast<Eigen::Index>(samples.size()), static_cast<Eigen::Index>(kFeatureCount));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f)) = samples[i].features.fs[f];
    }
  }
  return X;
}

// Index of each sample's label in `classes`.
inline std::vector<int> class_indices(std::span<const LabeledSample> samples, std::span<const std::string> classes) {
  std::vector<int> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    const auto it = std::find(classes.begin(), classes.end(), s.label);
    if (it == classes.end()) fail(ErrorKind::InvalidInput, "label '" + s.label + "' is not a declared class");
    out.push_back(static_cast<int>(it - classes.begin()));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Standardization and PCA

struct StandardizerPca {
  std::vector<double> mean;    // per input feature
  std::vector<double> stddev;  // per input feature, sample estimate; 0 marks a dropped feature
  std::vector<int> kept;       // input features with non-zero spread, ascending
  Matrix components;           // k x kept.size(), orthonormal rows
  std::vector<double> explained;  // variance ratio of each retained component
  double variance_fraction = 0.95;

  int input_dims() const { return static_cast<int>(mean.size()); }
  int dims() const { return static_cast<int>(components.rows()); }

  double retained_variance() const { return std::accumulate(explained.begin(), explained.end(), 0.0); }

  // z-scores of the kept features.
  Vector standardize(std::span<const double> x) const {
    if (x.size() != mean.size()) fail(ErrorKind::InvalidInput, "feature dimension mismatch");
    Vector z(static_cast<Eigen::Index>(kept.size()));
    for (std::size_t k = 0; k < kept.size(); ++k) {
      const auto f = static_cast<std::size_t>(kept[k]);
      z(static_cast<Eigen::Index>(k)) = (x[f] - mean[f]) / stddev[f];
    }
    return z;
  }

  Vector transform(std::span<const double> x) const { return components * standardize(x); }

  Matrix transform(const Matrix& X) const {
    Matrix out(X.rows(), components.rows());
    std::vector<double> row(static_cast<std::size_t>(X.cols()));
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      for (Eigen::Index f = 0; f < X.cols(); ++f) row[static_cast<std::size_t>(f)] = X(i, f);
      out.row(i) = transform(row).transpose();
    }
    return out;
  }

  // Back from component coordinates into standardized feature space.
  Vector reconstruct(const Vector& y) const { return components.transpose() * y; }
};

inline StandardizerPca fit_standardizer_pca(const Matrix& X, double variance_fraction = 0.95) {
  const Eigen::Index n = X.rows(), d = X.cols();
  if (n < 2) fail(ErrorKind::InsufficientData, "PCA needs at least 2 samples");
  if (!(variance_fraction > 0.0 && variance_fraction <= 1.0)) {
    fail(ErrorKind::InvalidInput, "variance fraction must lie in (0, 1]");
  }
  if (!X.allFinite()) fail(ErrorKind::InvalidInput, "non-finite feature value");

  StandardizerPca out;
  out.variance_fraction = variance_fraction;
  out.mean.resize(static_cast<std::size_t>(d));
  out.stddev.assign(static_cast<std::size_t>(d), 0.0);
  for (Eigen::Index f = 0; f < d; ++f) {
    const double mu = X.col(f).mean();
    const double ss = (X.col(f).array() - mu).square().sum();
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    out.mean[static_cast<std::size_t>(f)] = mu;
    if (sd > kRelativeSpreadFloor * std::max(1.0, std::abs(mu))) {
      out.stddev[static_cast<std::size_t>(f)] = sd;
      out.kept.push_back(static_cast<int>(f));
    }
  }
  if (out.kept.empty()) fail(ErrorKind::DegenerateTraining, "no feature varies across samples");

  const auto m = static_cast<Eigen::Index>(out.kept.size());
  Matrix Z(n, m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto f = static_cast<std::size_t>(out.kept[static_cast<std::size_t>(k)]);
    Z.col(k) = (X.col(static_cast<Eigen::Index>(f)).array() - out.mean[f]) / out.stddev[f];
  }
  const Matrix cov = (Z.transpose() * Z) / static_cast<double>(n - 1);
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  if (eig.info() != Eigen::Success) fail(ErrorKind::DegenerateTraining, "eigendecomposition failed");

  // Eigen returns ascending eigenvalues.
  std::vector<double> values(static_cast<std::size_t>(m));
  for (Eigen::Index k = 0; k < m; ++k) values[static_cast<std::size_t>(k)] = std::max(0.0, eig.eigenvalues()(m - 1 - k));
  const double total = std::accumulate(values.begin(), values.end(), 0.0);
  std::size_t keep = 0;
  double cumulative = 0.0;
  while (keep < values.size()) {
    cumulative += values[keep];
    ++keep;
    if (cumulative / total >= variance_fraction - 1e-12) break;
  }

  out.components.resize(static_cast<Eigen::Index>(keep), m);
  for (std::size_t k = 0; k < keep; ++k) {
    Vector v = eig.eigenvectors().col(m - 1 - static_cast<Eigen::Index>(k));
    // Sign convention: the largest-magnitude loading is positive.
    Eigen::Index arg = 0;
    for (Eigen::Index i = 1; i < m; ++i) {
      if (std::abs(v(i)) > std::abs(v(arg))) arg = i;
    }
    if (v(arg) < 0.0) v = -v;
    out.components.row(static_cast<Eigen::Index>(k)) = v.transpose();
    out.explained.push_back(values[k] / total);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Wilcoxon rank-sum test

namespace detail {

// Twice the mid-rank of every pooled value (so ties stay integral).
inline std::vector<std::int64_t> doubled_midranks(std::span<const double> pooled) {
  std::vector<std::size_t> order(pooled.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pooled[a] < pooled[b]; });
  std::vector<std::int64_t> ranks(pooled.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && pooled[order[j + 1]] == pooled[order[i]]) ++j;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = static_cast<std::int64_t>(i + j + 2);
    i = j + 1;
  }
  return ranks;
}

}  // namespace detail

inline constexpr std::size_t kExactRankSumLimit = 12;

/// Two-sided Wilcoxon rank-sum p-value. With at most 12 pooled values the
/// null distribution of the rank sum is enumerated exactly (mid-ranks for
/// ties) and p = min(1, 2 * smaller tail); otherwise the normal
/// approximation with tie and continuity correction is used.
inline double ranksum_p(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) fail(ErrorKind::InsufficientData, "rank-sum test needs two non-empty samples");
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  for (double v : pooled) {
    if (!std::isfinite(v)) fail(ErrorKind::InvalidInput, "non-finite value in rank-sum test");
  }
  const auto ranks = detail::doubled_midranks(pooled);
  const std::size_t na = a.size(), nb = b.size(), n = pooled.size();
  std::int64_t observed = 0;
  for (std::size_t i = 0; i < na; ++i) observed += ranks[i];

  if (n <= kExactRankSumLimit) {
    std::uint64_t below = 0, above = 0, total = 0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
      if (static_cast<std::size_t>(std::popcount(mask)) != na) continue;
      std::int64_t w = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if ((mask >> i) & 1u) w += ranks[i];
      }
      ++total;
      if (w <= observed) ++below;
      if (w >= observed) ++above;
    }
    const double tail = static_cast<double>(std::min(below, above)) / static_cast<double>(total);
    return std::min(1.0, 2.0 * tail);
  }

  const double fa = static_cast<double>(na), fb = static_cast<double>(nb), fn = static_cast<double>(n);
  const double u = static_cast<double>(observed) / 2.0 - fa * (fa + 1.0) / 2.0;
  const double mu = fa * fb / 2.0;
  double ties = 0.0;
  std::vector<std::int64_t> sorted = ranks;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    ties += t * t * t - t;
    i = j;
  }
  const double var = fa * fb / 12.0 * ((fn + 1.0) - ties / (fn * (fn - 1.0)));
  if (var <= 0.0) return 1.0;
  const double z = std::max(0.0, std::abs(u - mu) - 0.5) / std::sqrt(var);
  return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

/// Feature indices ordered by ascending rank-sum p-value between the rows
/// labelled class_a and class_b (ties by index).
inline std::vector<int> rank_features(const Matrix& X, std::span<const int> labels, int class_a, int class_b) {
  if (labels.size() != static_cast<std::size_t>(X.rows())) fail(ErrorKind::InvalidInput, "label count mismatch");
  std::vector<Eigen::Index> rows_a, rows_b;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == class_a) rows_a.push_back(static_cast<Eigen::Index>(i));
    if (labels[i] == class_b) rows_b.push_back(static_cast<Eigen::Index>(i));
  }
  if (rows_a.empty() || rows_b.empty()) fail(ErrorKind::InsufficientData, "both classes must be present");
  std::vector<double> p(static_cast<std::size_t>(X.cols()));
  std::vector<double> va(rows_a.size()), vb(rows_b.size());
  for (Eigen::Index f = 0; f < X.cols(); ++f) {
    for (std::size_t i = 0; i < rows_a.size(); ++i) va[i] = X(rows_a[i], f);
    for (std::size_t i = 0; i < rows_b.size(); ++i) vb[i] = X(rows_b[i], f);
    p[static_cast<std::size_t>(f)] = ranksum_p(va, vb);
  }
  std::vector<int> order(p.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
    return p[static_cast<std::size_t>(x)] < p[static_cast<std::size_t>(y)];
  });
  return order;
}

inline std::vector<int> rank_features(std::span<const LabeledSample> samples, const std::string& class_a,
                                      const std::string& class_b) {
  std::vector<int> labels;
  for (const auto& s : samples) labels.push_back(s.label == class_a ? 0 : s.label == class_b ? 1 : -1);
  return rank_features(feature_matrix(samples), labels, 0, 1);
}

// ---------------------------------------------------------------------------
// Linear max-margin learner

struct LinearLearner {
  Vector weights;
  double bias = 0.0;
  double c = 1.0;
  double platt_a = 0.0;
  double platt_b = 0.0;

  double decision(const Vector& z) const { return weights.dot(z) + bias; }

  double posterior(double score) const {
    const double f = platt_a * score + platt_b;
    return f >= 0.0 ? std::exp(-f) / (1.0 + std::exp(-f)) : 1.0 / (1.0 + std::exp(f));
  }
};

inline constexpr double kSvmTolerance = 1e-6;

// Primal objective (1/2)|w|^2 + C * sum of hinge losses.
inline double svm_objective(const LinearLearner& m, const Matrix& X, std::span<const int> y) {
  double hinge = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const double margin = y[static_cast<std::size_t>(i)] * (X.row(i).dot(m.weights) + m.bias);
    hinge += std::max(0.0, 1.0 - margin);
  }
  return 0.5 * m.weights.squaredNorm() + m.c * hinge;
}

/// Soft-margin linear SVM solved in the dual by sequential minimal
/// optimization with second-order working-set selection, stopping when the
/// maximal KKT violation falls below 1e-6. The solver makes no random
/// choices; `seed` is accepted for interface symmetry and ignored.
inline LinearLearner train_linear(const Matrix& X, std::span<const int> y, double C, std::uint64_t seed = 0) {
  static_cast<void>(seed);
  const auto n = static_cast<Eigen::Index>(y.size());
  if (X.rows() != n) fail(ErrorKind::InvalidInput, "sample/label count mismatch");
  if (!(C > 0.0) || !std::isfinite(C)) fail(ErrorKind::InvalidInput, "C must be positive");
  if (!X.allFinite()) fail(ErrorKind::InvalidInput, "non-finite training value");
  bool has_pos = false, has_neg = false;
  for (int v : y) {
    if (v != 1 && v != -1) fail(ErrorKind::InvalidInput, "labels must be +1 or -1");
    (v > 0 ? has_pos : has_neg) = true;
  }
  if (!has_pos || !has_neg) fail(ErrorKind::DegenerateTraining, "both labels are required");

  constexpr double tau = 1e-12;
  const Vector diag = X.rowwise().squaredNorm();
  Vector alpha = Vector::Zero(n);
  Vector grad = Vector::Constant(n, -1.0);  // gradient of the dual objective
  auto yy = [&](Eigen::Index t) { return static_cast<double>(y[static_cast<std::size_t>(t)]); };
  auto in_up = [&](Eigen::Index t) { return yy(t) > 0 ? alpha(t) < C : alpha(t) > 0.0; };
  auto in_low = [&](Eigen::Index t) { return yy(t) > 0 ? alpha(t) > 0.0 : alpha(t) < C; };

  const std::int64_t max_iter = std::max<std::int64_t>(10'000'000, 100 * static_cast<std::int64_t>(n));
  for (std::int64_t iter = 0; iter < max_iter; ++iter) {
    Eigen::Index i = -1;
    double gmax = -std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < n; ++t) {
      if (in_up(t) && -yy(t) * grad(t) > gmax) {
        gmax = -yy(t) * grad(t);
        i = t;
      }
    }
    if (i < 0) break;
    const Vector ki = X * X.row(i).transpose();

    Eigen::Index j = -1;
    double gmin = std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < n; ++t) {
      if (!in_low(t)) continue;
      const double v = -yy(t) * grad(t);
      gmin = std::min(gmin, v);
      const double b = gmax - v;
      if (b > 0.0) {
        double a = diag(i) + diag(t) - 2.0 * ki(t);
        if (a <= 0.0) a = tau;
        if (-(b * b) / a < best) {
          best = -(b * b) / a;
          j = t;
        }
      }
    }
    if (j < 0 || gmax - gmin < kSvmTolerance) break;
    const Vector kj = X * X.row(j).transpose();

    const double old_i = alpha(i), old_j = alpha(j);
    const double qij = yy(i) * yy(j) * ki(j);
    if (yy(i) != yy(j)) {
      double quad = diag(i) + diag(j) + 2.0 * qij;
      if (quad <= 0.0) quad = tau;
      const double delta = (-grad(i) - grad(j)) / quad;
      const double diff = alpha(i) - alpha(j);
      alpha(i) += delta;
      alpha(j) += delta;
      if (diff > 0.0) {
        if (alpha(j) < 0.0) {
          alpha(j) = 0.0;
          alpha(i) = diff;
        }
      } else if (alpha(i) < 0.0) {
        alpha(i) = 0.0;
        alpha(j) = -diff;
      }
      if (diff > 0.0) {
        if (alpha(i) > C) {
          alpha(i) = C;
          alpha(j) = C - diff;
        }
      } else if (alpha(j) > C) {
        alpha(j) = C;
        alpha(i) = C + diff;
      }
    } else {
      double quad = diag(i) + diag(j) - 2.0 * qij;
      if (quad <= 0.0) quad = tau;
      const double delta = (grad(i) - grad(j)) / quad;
      const double sum = alpha(i) + alpha(j);
      alpha(i) -= delta;
      alpha(j) += delta;
      if (sum > C) {
        if (alpha(i) > C) {
          alpha(i) = C;
          alpha(j) = sum - C;
        }
      } else if (alpha(j) < 0.0) {
        alpha(j) = 0.0;
        alpha(i) = sum;
      }
      if (sum > C) {
        if (alpha(j) > C) {
          alpha(j) = C;
          alpha(i) = sum - C;
        }
      } else if (alpha(i) < 0.0) {
        alpha(i) = 0.0;
        alpha(j) = sum;
      }
    }
    const double di = alpha(i) - old_i, dj = alpha(j) - old_j;
    for (Eigen::Index t = 0; t < n; ++t) {
      grad(t) += yy(t) * (yy(i) * ki(t) * di + yy(j) * kj(t) * dj);
    }
  }

  LinearLearner out;
  out.c = C;
  out.weights = Vector::Zero(X.cols());
  for (Eigen::Index t = 0; t < n; ++t) {
    if (alpha(t) != 0.0) out.weights += alpha(t) * yy(t) * X.row(t).transpose();
  }
  // Offset from the free multipliers, or the midpoint of the feasible range.
  double upper = std::numeric_limits<double>::infinity(), lower = -upper, free_sum = 0.0;
  int free_count = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double yg = yy(t) * grad(t);
    if (alpha(t) >= C) {
      if (yy(t) < 0) upper = std::min(upper, yg);
      else lower = std::max(lower, yg);
    } else if (alpha(t) <= 0.0) {
      if (yy(t) > 0) upper = std::min(upper, yg);
      else lower = std::max(lower, yg);
    } else {
      ++free_count;
      free_sum += yg;
    }
  }
  const double rho = free_count > 0 ? free_sum / free_count : 0.5 * (upper + lower);
  out.bias = -rho;
  return out;
}

// ---------------------------------------------------------------------------
// Platt calibration

struct PlattParams {
  double a = 0.0;
  double b = 0.0;
};

inline constexpr double kPlattGradientTolerance = 1e-8;

// Platt's smoothed targets for +1 / -1 labels.
inline std::pair<double, double> platt_targets(std::span<const int> labels) {
  double pos = 0.0, neg = 0.0;
  for (int v : labels) (v > 0 ? pos : neg) += 1.0;
  return {(pos + 1.0) / (pos + 2.0), 1.0 / (neg + 2.0)};
}

/// Fits P(y = 1 | s) = 1 / (1 + exp(a s + b)) by Newton's method with
/// backtracking on the smoothed-target log-likelihood.
inline PlattParams platt_fit(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) fail(ErrorKind::InvalidInput, "score/label count mismatch");
  double prior_pos = 0.0, prior_neg = 0.0;
  for (int v : labels) {
    if (v != 1 && v != -1) fail(ErrorKind::InvalidInput, "labels must be +1 or -1");
    (v > 0 ? prior_pos : prior_neg) += 1.0;
  }
  if (prior_pos == 0.0 || prior_neg == 0.0) fail(ErrorKind::DegenerateTraining, "both labels are required");
  for (double s : scores) {
    if (!std::isfinite(s)) fail(ErrorKind::InvalidInput, "non-finite score");
  }
  const auto [hi, lo] = platt_targets(labels);
  const std::size_t n = scores.size();
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = labels[i] > 0 ? hi : lo;

  auto nll = [&](double a, double b) {
    double f = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = scores[i] * a + b;
      f += z >= 0.0 ? t[i] * z + std::log1p(std::exp(-z)) : (t[i] - 1.0) * z + std::log1p(std::exp(z));
    }
    return f;
  };

  constexpr int kMaxIter = 1000;
  constexpr double kMinStep = 1e-10;
  constexpr double kSigma = 1e-12;
  double a = 0.0, b = std::log((prior_neg + 1.0) / (prior_pos + 1.0));
  double fval = nll(a, b);
  for (int iter = 0; iter < kMaxIter; ++iter) {
    double h11 = kSigma, h22 = kSigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = scores[i] * a + b;
      double p, q;
      if (z >= 0.0) {
        p = std::exp(-z) / (1.0 + std::exp(-z));
        q = 1.0 / (1.0 + std::exp(-z));
      } else {
        p = 1.0 / (1.0 + std::exp(z));
        q = std::exp(z) / (1.0 + std::exp(z));
      }
      const double d2 = p * q;
      h11 += scores[i] * scores[i] * d2;
      h22 += d2;
      h21 += scores[i] * d2;
      const double d1 = t[i] - p;
      g1 += scores[i] * d1;
      g2 += d1;
    }
    if (std::hypot(g1, g2) <= kPlattGradientTolerance) break;

    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * da + g2 * db;
    double step = 1.0;
    while (step >= kMinStep) {
      const double na = a + step * da, nb = b + step * db;
      const double nf = nll(na, nb);
      if (nf < fval + 1e-4 * step * gd) {
        a = na;
        b = nb;
        fval = nf;
        break;
      }
      step /= 2.0;
    }
    // No decrease is representable any more: at the optimum to rounding.
    if (step < kMinStep) break;
  }
  return {a, b};
}

// ---------------------------------------------------------------------------
// One-vs-all ECOC

struct EcocOptions {
  double c = 1.0;
  double variance_fraction = 0.95;
  std::uint64_t seed = 0;
  int platt_folds = 10;
};

struct EcocModel {
  std::vector<std::string> classes;
  StandardizerPca pca;
  std::vector<LinearLearner> learners;  // one per class, positive = that class
  EcocOptions options;
  std::size_t per_class = 0;  // balanced sample count per class

  // One-vs-all coding: +1 on the diagonal, -1 elsewhere.
  int code(std::size_t row, std::size_t learner) const { return row == learner ? 1 : -1; }
};

// Fold of every sample: each class's members, in sample order, are dealt
// round-robin, continuing from where the previous class stopped.
inline std::vector<int> stratified_folds(std::span<const int> labels, int num_classes, int folds) {
  if (folds < 1) fail(ErrorKind::InvalidInput, "fold count must be positive");
  std::vector<int> out(labels.size(), 0);
  int next = 0;
  for (int c = 0; c < num_classes; ++c) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] != c) continue;
      out[i] = next;
      next = (next + 1) % folds;
    }
  }
  return out;
}

// Down-samples every class to the smallest class count. Returns ascending
// row indices.
inline std::vector<std::size_t> balanced_selection(std::span<const int> labels, int num_classes, std::uint64_t seed) {
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(num_classes));
  for (std::size_t i = 0; i < labels.size(); ++i) members[static_cast<std::size_t>(labels[i])].push_back(i);
  std::size_t minority = labels.size();
  for (const auto& m : members) minority = std::min(minority, m.size());
  Rng rng(seed);
  std::vector<std::size_t> chosen;
  for (auto& m : members) {
    rng.shuffle(std::span<std::size_t>(m));
    chosen.insert(chosen.end(), m.begin(), m.begin() + static_cast<std::ptrdiff_t>(minority));
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

inline Matrix select_rows(const Matrix& X, std::span<const std::size_t> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

/// Balances classes by seeded down-sampling, fits the standardizer/PCA on
/// the balanced set, trains one linear learner per class against the rest,
/// and calibrates each learner with Platt scaling on stratified
/// out-of-fold scores (min(platt_folds, per-class count) folds).
inline EcocModel train_ecoc(const Matrix& X, std::span<const int> labels, std::vector<std::string> classes,
                            const EcocOptions& options = {}) {
  const int K = static_cast<int>(classes.size());
  if (K < 2) fail(ErrorKind::InsufficientData, "at least two classes are required");
  if (labels.size() != static_cast<std::size_t>(X.rows())) fail(ErrorKind::InvalidInput, "label count mismatch");
  std::vector<std::size_t> counts(static_cast<std::size_t>(K), 0);
  for (int l : labels) {
    if (l < 0 || l >= K) fail(ErrorKind::InvalidInput, "label outside the class list");
    ++counts[static_cast<std::size_t>(l)];
  }
  for (int k = 0; k < K; ++k) {
    if (counts[static_cast<std::size_t>(k)] < 2) {
      fail(ErrorKind::InsufficientData, "class '" + classes[static_cast<std::size_t>(k)] + "' has fewer than 2 samples");
    }
  }

  EcocModel model;
  model.classes = std::move(classes);
  model.options = options;
  const auto rows = balanced_selection(labels, K, options.seed);
  model.per_class = rows.size() / static_cast<std::size_t>(K);
  const Matrix balanced = select_rows(X, rows);
  std::vector<int> bal_labels;
  for (std::size_t r : rows) bal_labels.push_back(labels[r]);

  model.pca = fit_standardizer_pca(balanced, options.variance_fraction);
  const Matrix Z = model.pca.transform(balanced);
  const int folds = std::max(2, std::min(options.platt_folds, static_cast<int>(model.per_class)));

  for (int k = 0; k < K; ++k) {
    std::vector<int> y(bal_labels.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = model.code(static_cast<std::size_t>(k), static_cast<std::size_t>(bal_labels[i]));
    LinearLearner learner = train_linear(Z, y, options.c, options.seed);

    // Out-of-fold scores; folds stratified on the binary labels.
    std::vector<int> binary(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) binary[i] = y[i] > 0 ? 0 : 1;
    const auto fold_of = stratified_folds(binary, 2, folds);
    std::vector<double> oof(y.size());
    for (int f = 0; f < folds; ++f) {
      std::vector<std::size_t> train_rows, test_rows;
      for (std::size_t i = 0; i < y.size(); ++i) (fold_of[i] == f ? test_rows : train_rows).push_back(i);
      std::vector<int> fy;
      for (std::size_t r : train_rows) fy.push_back(y[r]);
      const LinearLearner part = train_linear(select_rows(Z, train_rows), fy, options.c, options.seed);
      for (std::size_t r : test_rows) oof[r] = part.decision(Z.row(static_cast<Eigen::Index>(r)).transpose());
    }
    const PlattParams platt = platt_fit(oof, y);
    learner.platt_a = platt.a;
    learner.platt_b = platt.b;
    model.learners.push_back(std::move(learner));
  }
  return model;
}

inline EcocModel train_ecoc(std::span<const LabeledSample> samples, std::vector<std::string> classes,
                            const EcocOptions& options = {}) {
  const auto labels = class_indices(samples, classes);
  return train_ecoc(feature_matrix(samples), labels, std::move(classes), options);
}

struct Prediction {
  std::vector<double> posterior;  // renormalized, in class order
  std::vector<double> raw;        // per-learner Platt posteriors
  std::vector<double> scores;     // per-learner decision values
  std::size_t index = 0;          // argmax, earliest class on ties
};

inline Prediction predict_posterior(const EcocModel& model, std::span<const double> features) {
  if (features.size() != static_cast<std::size_t>(model.pca.input_dims())) {
    fail(ErrorKind::InvalidInput, "feature dimension mismatch");
  }
  const Vector z = model.pca.transform(features);
  Prediction out;
  double total = 0.0;
  for (const auto& learner : model.learners) {
    const double s = learner.decision(z);
    out.scores.push_back(s);
    out.raw.push_back(learner.posterior(s));
    total += out.raw.back();
  }
  out.posterior.resize(out.raw.size());
  for (std::size_t k = 0; k < out.raw.size(); ++k) {
    out.posterior[k] = total > 0.0 ? out.raw[k] / total : 1.0 / static_cast<double>(out.raw.size());
  }
  out.index = static_cast<std::size_t>(std::max_element(out.posterior.begin(), out.posterior.end()) - out.posterior.begin());
  return out;
}

inline Prediction predict_posterior(const EcocModel& model, const FeatureVector& f) {
  return predict_posterior(model, std::span<const double>(f.fs));
}

// ---------------------------------------------------------------------------
// Cross-validation

struct CrossValidation {
  std::vector<int> fold;                       // per sample
  std::vector<std::vector<double>> posterior;  // per sample, class order
};

/// Stratified k-fold: each sample is scored by a model trained on the other
/// folds. k equal to the sample count is leave-one-out.
inline CrossValidation cross_validate(const Matrix& X, std::span<const int> labels, const std::vector<std::string>& classes,
                                      int k = 10, const EcocOptions& options = {}) {
  const int K = static_cast<int>(classes.size());
  if (labels.size() != static_cast<std::size_t>(X.rows())) fail(ErrorKind::InvalidInput, "label count mismatch");
  if (k < 2) fail(ErrorKind::InvalidInput, "at least 2 folds are required");
  const bool leave_one_out = static_cast<std::size_t>(k) == labels.size();
  std::vector<std::size_t> counts(static_cast<std::size_t>(K), 0);
  for (int l : labels) {
    if (l < 0 || l >= K) fail(ErrorKind::InvalidInput, "label outside the class list");
    ++counts[static_cast<std::size_t>(l)];
  }
  for (std::size_t c : counts) {
    if (!leave_one_out && c < static_cast<std::size_t>(k)) fail(ErrorKind::InsufficientData, "class smaller than fold count");
  }

  CrossValidation out;
  out.fold = stratified_folds(labels, K, k);
  out.posterior.resize(labels.size());
  for (int f = 0; f < k; ++f) {
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t i = 0; i < labels.size(); ++i) (out.fold[i] == f ? test_rows : train_rows).push_back(i);
    std::vector<int> train_labels;
    for (std::size_t r : train_rows) train_labels.push_back(labels[r]);
    const EcocModel model = train_ecoc(select_rows(X, train_rows), train_labels, classes, options);
    std::vector<double> row(static_cast<std::size_t>(X.cols()));
    for (std::size_t r : test_rows) {
      for (Eigen::Index c = 0; c < X.cols(); ++c) row[static_cast<std::size_t>(c)] = X(static_cast<Eigen::Index>(r), c);
      out.posterior[r] = predict_posterior(model, row).posterior;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// ROC

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> grid;                      // thresholds 0.00, 0.01, ..., 1.00
  std::vector<std::pair<double, double>> points;   // (fpr, tpr) at every distinct score, from (0,0) to (1,1)
  double auc = 0.0;                                // trapezoidal area under `points`
};

inline constexpr int kRocGridSteps = 100;

/// ROC of scores against +1/-1 labels, calling a sample positive when its
/// score is >= the threshold. The reported grid uses the fixed thresholds
/// i/100; the AUC integrates the curve through every distinct score, which
/// makes it exact (equal to pair counting) and invariant to monotone
/// transforms of the scores.
inline RocCurve roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) fail(ErrorKind::InvalidInput, "score/label count mismatch");
  std::int64_t P = 0, N = 0;
  for (int v : labels) {
    if (v != 1 && v != -1) fail(ErrorKind::InvalidInput, "labels must be +1 or -1");
    (v > 0 ? P : N) += 1;
  }
  if (P == 0 || N == 0) fail(ErrorKind::InsufficientData, "ROC needs both labels");
  for (double s : scores) {
    if (std::isnan(s)) fail(ErrorKind::InvalidInput, "NaN score");
  }

  RocCurve out;
  for (int i = 0; i <= kRocGridSteps; ++i) {
    const double t = i / static_cast<double>(kRocGridSteps);
    std::int64_t tp = 0, fp = 0;
    for (std::size_t k = 0; k < scores.size(); ++k) {
      if (scores[k] >= t) (labels[k] > 0 ? tp : fp) += 1;
    }
    out.grid.push_back({t, static_cast<double>(fp) / static_cast<double>(N), static_cast<double>(tp) / static_cast<double>(P)});
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  // Twice the area in units of 1/(P N), kept integral so it is exact.
  std::int64_t area2 = 0, tp = 0, fp = 0;
  out.points.emplace_back(0.0, 0.0);
  for (std::size_t i = 0; i < order.size();) {
    const std::int64_t tp0 = tp, fp0 = fp;
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] > 0 ? tp : fp) += 1;
      ++j;
    }
    area2 += (fp - fp0) * (tp + tp0);
    out.points.emplace_back(static_cast<double>(fp) / static_cast<double>(N), static_cast<double>(tp) / static_cast<double>(P));
    i = j;
  }
  out.auc = static_cast<double>(area2) / static_cast<double>(2 * P * N);
  return out;
}

// One-vs-rest ROC for class `k` from per-sample posteriors.
inline RocCurve class_roc(const std::vector<std::vector<double>>& posteriors, std::span<const int> labels, int k) {
  std::vector<double> scores;
  std::vector<int> binary;
  for (std::size_t i = 0; i < posteriors.size(); ++i) {
    scores.push_back(posteriors[i][static_cast<std::size_t>(k)]);
    binary.push_back(labels[i] == k ? 1 : -1);
  }
  return roc_auc(scores, binary);
}

}  // namespace pavetex
