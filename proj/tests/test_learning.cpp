#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "oracles/learning_oracles.hpp"
#include "pavetex/learning.hpp"
#include "pavetex/model_io.hpp"

using namespace pavetex;

namespace {

template <typename F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no pavetex::Error raised";
  return ErrorKind::IoError;
}

struct Blobs {
  Matrix X;
  std::vector<int> labels;
  std::vector<Eigen::VectorXd> centres;
};

// Well separated Gaussian clusters: unit spread, centres ~20 apart.
Blobs blobs(const std::vector<int>& counts, int dims, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  Blobs b;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(dims);
    c(static_cast<Eigen::Index>(k % dims)) = 20.0;
    c(static_cast<Eigen::Index>((k + 1) % dims)) += 5.0 * k;
    b.centres.push_back(c);
  }
  const int total = std::accumulate(counts.begin(), counts.end(), 0);
  b.X.resize(total, dims);
  int row = 0;
  for (std::size_t k = 0; k < counts.size(); ++k)
    for (int i = 0; i < counts[k]; ++i, ++row) {
      for (int d = 0; d < dims; ++d) b.X(row, d) = b.centres[k](d) + n01(rng);
      b.labels.push_back(static_cast<int>(k));
    }
  return b;
}


std::vector<double> copy_row(const Matrix& X, Eigen::Index r) {
  std::vector<double> v(static_cast<std::size_t>(X.cols()));
  for (Eigen::Index c = 0; c < X.cols(); ++c) v[static_cast<std::size_t>(c)] = X(r, c);
  return v;
}

const std::vector<std::string> kThree{"a", "b", "c"};

}  // namespace

// --- PCA ----------------------------------------------------------------------

TEST(Pca, PointsOnALineNeedOneComponent) {
  Matrix X(6, 2);
  for (int i = 0; i < 6; ++i) X(i, 0) = i, X(i, 1) = 3.0 * i - 2.0;
  const auto p = fit_standardizer_pca(X, 0.95);
  EXPECT_EQ(p.dims(), 1);
  EXPECT_NEAR(p.explained[0], 1.0, 1e-12);
}

TEST(Pca, TransformedTrainingDataIsCentred) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(3.0, 2.0);
  Matrix X(50, 5);
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = n(rng);
  X.col(4) = 2.0 * X.col(0) + X.col(1);
  const auto p = fit_standardizer_pca(X, 1.0);
  const Matrix Z = p.transform(X);
  for (Eigen::Index k = 0; k < Z.cols(); ++k) EXPECT_NEAR(Z.col(k).mean(), 0.0, 1e-9);
}

TEST(Pca, IsotropicGaussianKeepsAllThree) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix X(400, 3);
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = n(rng);
  const auto p = fit_standardizer_pca(X, 0.99);
  EXPECT_EQ(p.dims(), 3);

  // Oracle: correlation-matrix eigenvalues by power iteration; the two
  // largest must fall short of 99 %.
  Matrix Z = X;
  for (Eigen::Index c = 0; c < 3; ++c) {
    Z.col(c).array() -= Z.col(c).mean();
    Z.col(c) /= std::sqrt(Z.col(c).squaredNorm() / 399.0);
  }
  const auto ev = oracle::eigenvalues_by_power(Z.transpose() * Z / 399.0, 3);
  EXPECT_LT((ev[0] + ev[1]) / (ev[0] + ev[1] + ev[2]), 0.99);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(p.explained[static_cast<std::size_t>(k)], ev[static_cast<std::size_t>(k)] / 3.0, 1e-6);
}

TEST(Pca, ComponentsOrthonormalAndProjectionIdempotent) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix X(60, 8);
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = n(rng);
  X.col(7) = X.col(0) - X.col(2) + 0.01 * X.col(3);
  const auto p = fit_standardizer_pca(X, 0.8);
  const Matrix I = p.components * p.components.transpose();
  EXPECT_TRUE(I.isApprox(Matrix::Identity(p.dims(), p.dims()), 1e-9));
  const auto z = p.standardize(copy_row(X, 3));
  const Vector once = p.reconstruct(p.components * z);
  const Vector twice = p.reconstruct(p.components * once);
  EXPECT_LT((once - twice).norm(), 1e-9);
  for (Eigen::Index k = 0; k < p.components.rows(); ++k) {
    Eigen::Index arg;
    p.components.row(k).cwiseAbs().maxCoeff(&arg);
    EXPECT_GT(p.components(k, arg), 0.0);
  }
}

TEST(Pca, DropsConstantFeatures) {
  Matrix X(5, 3);
  X << 1, 7, 2, 2, 7, 1, 3, 7, 5, 4, 7, 3, 5, 7, 4;
  const auto p = fit_standardizer_pca(X, 1.0);
  EXPECT_EQ(p.kept, (std::vector<int>{0, 2}));
  EXPECT_EQ(p.stddev[1], 0.0);
  EXPECT_EQ(p.input_dims(), 3);
}

TEST(Pca, Errors) {
  EXPECT_EQ(kind_of([] { fit_standardizer_pca(Matrix::Ones(1, 3)); }), ErrorKind::InsufficientData);
  EXPECT_EQ(kind_of([] { fit_standardizer_pca(Matrix::Ones(4, 3)); }), ErrorKind::DegenerateTraining);
  EXPECT_EQ(kind_of([] { fit_standardizer_pca(Matrix::Random(4, 3), 0.0); }), ErrorKind::InvalidInput);
}

// --- Rank-sum -------------------------------------------------------------------

TEST(RankSum, DisjointTriplesGiveOneTenth) {
  const std::vector<double> a{1, 2, 3}, b{10, 11, 12};
  EXPECT_EQ(ranksum_p(a, b), 0.1);
  EXPECT_EQ(oracle::ranksum_enumerated(a, b), 0.1);
}

TEST(RankSum, IdenticalSamplesGiveOne) {
  const std::vector<double> a{4, 5, 6, 7};
  EXPECT_EQ(ranksum_p(a, a), 1.0);
  const std::vector<double> big(20, 3.0);
  EXPECT_EQ(ranksum_p(big, big), 1.0);
}

TEST(RankSum, SymmetricInItsArguments) {
  std::mt19937 rng(1);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> a(1 + rng() % 10), b(1 + rng() % 12);
    for (auto& v : a) v = rng() % 7;
    for (auto& v : b) v = rng() % 9;
    EXPECT_EQ(ranksum_p(a, b), ranksum_p(b, a));
  }
}

TEST(RankSum, ExactMatchesEnumerationWithTies) {
  std::mt19937 rng(2);
  for (int t = 0; t < 200; ++t) {
    const std::size_t na = 1 + rng() % 6, nb = 1 + rng() % (12 - na);
    std::vector<double> a(na), b(nb);
    for (auto& v : a) v = rng() % 6;
    for (auto& v : b) v = rng() % 6 + (t % 3);
    EXPECT_DOUBLE_EQ(ranksum_p(a, b), oracle::ranksum_enumerated(a, b)) << t;
  }
}

TEST(RankSum, NormalApproximationMatchesReferenceValues) {
  // Two-sided asymptotic Mann-Whitney with tie and continuity correction,
  // values from scipy.stats.mannwhitneyu.
  const std::vector<double> a1{1, 2, 3, 4, 5, 6, 7}, b1{4, 5, 6, 7, 8, 9, 10};
  EXPECT_NEAR(ranksum_p(a1, b1), 0.040028848463440375, 1e-12);
  const std::vector<double> a2{1.5, 2, 2, 3, 3, 3, 4, 8, 9}, b2{2, 3, 5, 5, 6, 7, 7, 7, 10, 11};
  EXPECT_NEAR(ranksum_p(a2, b2), 0.08378893804239139, 1e-12);
  std::vector<double> a3, b3;
  for (int i = 0; i < 20; ++i) a3.push_back(i);
  for (int i = 0; i < 15; ++i) b3.push_back(i + 3.5);
  EXPECT_NEAR(ranksum_p(a3, b3), 0.6288590757223551, 1e-12);
}

TEST(RankSum, EmptyInput) {
  const std::vector<double> a{1.0}, none;
  EXPECT_EQ(kind_of([&] { ranksum_p(a, none); }), ErrorKind::InsufficientData);
}

TEST(RankFeatures, DisjointFeatureFirst) {
  Matrix X(8, 2);
  std::vector<int> labels{0, 0, 0, 0, 1, 1, 1, 1};
  for (int i = 0; i < 8; ++i) X(i, 0) = 5.0, X(i, 1) = labels[static_cast<std::size_t>(i)] * 100 + i;
  EXPECT_EQ(rank_features(X, labels, 0, 1), (std::vector<int>{1, 0}));
}

TEST(RankFeatures, InformativeDimensionAndPermutation) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<LabeledSample> samples;
  for (int i = 0; i < 60; ++i) {
    LabeledSample s;
    s.label = i % 2 ? "x" : "y";
    for (auto& v : s.features.fs) v = n(rng);
    s.features.fs[37] += i % 2 ? 1.5 : -1.5;
    samples.push_back(s);
  }
  const auto order = rank_features(samples, "x", "y");
  EXPECT_EQ(order.front(), 37);
  std::vector<int> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 94; ++i) EXPECT_EQ(sorted[static_cast<std::size_t>(i)], i);
  // Direct p computation agrees with the order.
  const Matrix X = feature_matrix(samples);
  std::vector<double> p;
  for (int f : order) {
    std::vector<double> a, b;
    for (int i = 0; i < 60; ++i) (i % 2 ? a : b).push_back(X(i, f));
    p.push_back(ranksum_p(a, b));
  }
  EXPECT_TRUE(std::is_sorted(p.begin(), p.end()));
  EXPECT_EQ(kind_of([&] { rank_features(samples, "x", "z"); }), ErrorKind::InsufficientData);
}

// --- Linear learner ------------------------------------------------------------------

TEST(LinearSvm, OneDimensionalSymmetricPair) {
  Matrix X(2, 1);
  X << -1, 1;
  const std::vector<int> y{-1, 1};
  const auto m = train_linear(X, y, 1.0);
  EXPECT_NEAR(m.bias, 0.0, 1e-6);
  EXPECT_NEAR(m.weights(0), 1.0, 1e-6);
  EXPECT_LT(m.decision(X.row(0).transpose()), 0.0);
  EXPECT_GT(m.decision(X.row(1).transpose()), 0.0);
}

TEST(LinearSvm, ObjectiveMatchesReferenceSolver) {
  for (unsigned seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<std::array<double, 2>> pts;
    std::vector<int> y;
    Matrix X(20, 2);
    for (int i = 0; i < 20; ++i) {
      const int label = i % 2 ? 1 : -1;
      const double sep = seed % 2 ? 2.5 : 1.0;  // odd seeds separable, even ones overlap
      pts.push_back({n(rng) + label * sep, n(rng) - label * sep * 0.5});
      y.push_back(label);
      X(i, 0) = pts.back()[0];
      X(i, 1) = pts.back()[1];
    }
    for (double C : {0.1, 1.0}) {
      const auto m = train_linear(X, y, C);
      const double ours = svm_objective(m, X, y);
      const double ref = oracle::svm_reference_objective(pts, y, C);
      EXPECT_LE(std::abs(ours - ref), 1e-4 * ref) << "seed " << seed << " C " << C;
    }
  }
}

TEST(LinearSvm, DuplicatedDataGivesSamePredictions) {
  const auto b = blobs({15, 15}, 2, 3);
  std::vector<int> y;
  for (int l : b.labels) y.push_back(l ? 1 : -1);
  Matrix X2(60, 2);
  X2 << b.X, b.X;
  std::vector<int> y2 = y;
  y2.insert(y2.end(), y.begin(), y.end());
  const auto m1 = train_linear(b.X, y, 0.5), m2 = train_linear(X2, y2, 0.25);
  for (double u = -5; u <= 30; u += 0.7)
    for (double v = -5; v <= 30; v += 0.7) {
      Vector z(2);
      z << u, v;
      const double d1 = m1.decision(z), d2 = m2.decision(z);
      if (std::abs(d1) > 1e-6) EXPECT_EQ(d1 > 0, d2 > 0) << u << "," << v;
    }
}

TEST(LinearSvm, DeterministicAndSeedIndependent) {
  const auto b = blobs({10, 12}, 3, 8);
  std::vector<int> y;
  for (int l : b.labels) y.push_back(l ? 1 : -1);
  const auto m1 = train_linear(b.X, y, 1.0, 1), m2 = train_linear(b.X, y, 1.0, 1), m3 = train_linear(b.X, y, 1.0, 99);
  EXPECT_EQ(m1.weights, m2.weights);
  EXPECT_EQ(m1.bias, m2.bias);
  EXPECT_EQ(m1.weights, m3.weights);
}

TEST(LinearSvm, Errors) {
  Matrix X(2, 1);
  X << 0, 1;
  const std::vector<int> one{1, 1}, both{1, -1};
  EXPECT_EQ(kind_of([&] { train_linear(X, one, 1.0); }), ErrorKind::DegenerateTraining);
  EXPECT_EQ(kind_of([&] { train_linear(X, both, 0.0); }), ErrorKind::InvalidInput);
}

// --- Platt ---------------------------------------------------------------------------

TEST(Platt, AntisymmetricScoresCentreAtHalf) {
  const std::vector<double> s{-3, -2, -1.5, -0.5, 0.5, 1.5, 2, 3};
  const std::vector<int> y{-1, -1, -1, -1, 1, 1, 1, 1};
  const auto p = platt_fit(s, y);
  LinearLearner l;
  l.platt_a = p.a;
  l.platt_b = p.b;
  EXPECT_NEAR(l.posterior(0.0), 0.5, 1e-6);
  EXPECT_LT(p.a, 0.0);
  for (double u = -4; u < 4; u += 0.25) EXPECT_LT(l.posterior(u), l.posterior(u + 0.25));
}

TEST(Platt, BeatsGridSearch) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<std::pair<std::vector<double>, std::vector<int>>> sets;
  sets.push_back({{-2.2, -1.4, -0.9, -0.3, 0.2, -0.1, 0.6, 1.1, 1.7, 2.4}, {-1, -1, -1, -1, -1, 1, 1, 1, 1, 1}});
  for (int t = 0; t < 9; ++t) {
    std::vector<double> s;
    std::vector<int> y;
    for (int i = 0; i < 10 + 5 * t; ++i) {
      y.push_back(i % 3 ? -1 : 1);
      s.push_back(y.back() * (0.3 + 0.2 * t) + n(rng));
    }
    sets.push_back({s, y});
  }
  for (const auto& [s, y] : sets) {
    const auto p = platt_fit(s, y);
    const double best = oracle::platt_nll(s, y, p.a, p.b);
    double grid = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 100; ++i)
      for (int j = 0; j < 100; ++j) grid = std::min(grid, oracle::platt_nll(s, y, -20.0 + 40.0 * i / 99, -20.0 + 40.0 * j / 99));
    EXPECT_LE(best, grid + 1e-12);
    // Stationary point of the oracle objective.
    const double h = 1e-6;
    const double ga = (oracle::platt_nll(s, y, p.a + h, p.b) - oracle::platt_nll(s, y, p.a - h, p.b)) / (2 * h);
    const double gb = (oracle::platt_nll(s, y, p.a, p.b + h) - oracle::platt_nll(s, y, p.a, p.b - h)) / (2 * h);
    EXPECT_LT(std::hypot(ga, gb), 1e-6);
  }
}

TEST(Platt, SingleClassIsDegenerate) {
  const std::vector<double> s{1, 2};
  const std::vector<int> y{1, 1};
  EXPECT_EQ(kind_of([&] { platt_fit(s, y); }), ErrorKind::DegenerateTraining);
}

// --- ECOC ----------------------------------------------------------------------------

TEST(Ecoc, SeparableThreeClassesHeldOut) {
  const auto train = blobs({30, 30, 30}, 6, 21);
  const auto test = blobs({20, 20, 20}, 6, 22);
  const auto model = train_ecoc(train.X, train.labels, kThree, {});
  ASSERT_EQ(model.learners.size(), 3u);
  for (Eigen::Index i = 0; i < test.X.rows(); ++i) {
    const auto row = copy_row(test.X, i);
    const auto p = predict_posterior(model, row);
    EXPECT_EQ(static_cast<int>(p.index), test.labels[static_cast<std::size_t>(i)]);
    EXPECT_EQ(static_cast<int>(p.index), oracle::nearest_centroid(train.centres, test.X.row(i).transpose()));
    EXPECT_NEAR(std::accumulate(p.posterior.begin(), p.posterior.end(), 0.0), 1.0, 1e-9);
    const auto raw_arg = std::max_element(p.raw.begin(), p.raw.end()) - p.raw.begin();
    EXPECT_EQ(static_cast<std::size_t>(raw_arg), p.index);
  }
  for (std::size_t k = 0; k < 3; ++k) {
    const auto centre = std::vector<double>(train.centres[k].data(), train.centres[k].data() + 6);
    EXPECT_EQ(predict_posterior(model, centre).index, k);
    EXPECT_LT(model.learners[k].platt_a, 0.0);
  }
}

TEST(Ecoc, BalancesToMinorityCount) {
  const auto b = blobs({10, 7, 12}, 4, 5);
  const auto model = train_ecoc(b.X, b.labels, kThree, {});
  EXPECT_EQ(model.per_class, 7u);
  const auto rows = balanced_selection(b.labels, 3, 0);
  std::vector<int> per(3, 0);
  for (auto r : rows) ++per[static_cast<std::size_t>(b.labels[r])];
  EXPECT_EQ(per, (std::vector<int>{7, 7, 7}));
  EXPECT_NE(balanced_selection(b.labels, 3, 1), rows);
}

TEST(Ecoc, CodingMatrixIsOneVsAll) {
  const auto b = blobs({4, 4, 4}, 3, 6);
  const auto model = train_ecoc(b.X, b.labels, kThree, {});
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(model.code(r, c), r == c ? 1 : -1);
}

TEST(Ecoc, RetrainingIsBitIdentical) {
  const auto b = blobs({12, 9, 11}, 5, 7);
  EcocOptions opt;
  opt.seed = 42;
  TrainedModel m1{train_ecoc(b.X, b.labels, kThree, opt), {}, 64};
  TrainedModel m2{train_ecoc(b.X, b.labels, kThree, opt), {}, 64};
  EXPECT_EQ(model_to_json(m1), model_to_json(m2));
  opt.seed = 43;
  TrainedModel m3{train_ecoc(b.X, b.labels, kThree, opt), {}, 64};
  EXPECT_NE(model_to_json(m1), model_to_json(m3));
}

TEST(Ecoc, Errors) {
  const auto b = blobs({5, 1, 5}, 3, 2);
  EXPECT_EQ(kind_of([&] { train_ecoc(b.X, b.labels, kThree, {}); }), ErrorKind::InsufficientData);
  const auto c = blobs({5, 5}, 3, 2);
  const std::vector<int> only_a(10, 0);
  EXPECT_EQ(kind_of([&] { train_ecoc(c.X, only_a, {"a"}, {}); }), ErrorKind::InsufficientData);
  const auto model = train_ecoc(c.X, c.labels, {"a", "b"}, {});
  const std::vector<double> wrong(4, 0.0);
  EXPECT_EQ(kind_of([&] { predict_posterior(model, wrong); }), ErrorKind::InvalidInput);
}

// --- Cross-validation -------------------------------------------------------------------

TEST(CrossValidation, FoldsPartitionAndStratify) {
  const auto b = blobs({23, 31, 17}, 4, 3);
  const auto folds = stratified_folds(b.labels, 3, 10);
  std::vector<std::vector<int>> count(10, std::vector<int>(3, 0));
  for (std::size_t i = 0; i < folds.size(); ++i) {
    ASSERT_GE(folds[i], 0);
    ASSERT_LT(folds[i], 10);
    ++count[static_cast<std::size_t>(folds[i])][static_cast<std::size_t>(b.labels[i])];
  }
  const int totals[3] = {23, 31, 17};
  for (const auto& f : count)
    for (int k = 0; k < 3; ++k) EXPECT_LE(std::abs(f[static_cast<std::size_t>(k)] - totals[k] / 10.0), 1.0);
}

TEST(CrossValidation, EverySampleScoredOutOfFold) {
  const auto b = blobs({20, 20, 20}, 5, 4);
  const auto cv = cross_validate(b.X, b.labels, kThree, 10);
  ASSERT_EQ(cv.posterior.size(), 60u);
  int correct = 0;
  for (std::size_t i = 0; i < 60; ++i) {
    ASSERT_EQ(cv.posterior[i].size(), 3u);
    const auto arg = std::max_element(cv.posterior[i].begin(), cv.posterior[i].end()) - cv.posterior[i].begin();
    correct += arg == b.labels[i];
  }
  EXPECT_EQ(correct, 60);
}

TEST(CrossValidation, LeaveOneOutMatchesIndividualModels) {
  const auto b = blobs({4, 4, 4}, 3, 10);
  const auto cv = cross_validate(b.X, b.labels, kThree, 12);
  for (Eigen::Index i = 0; i < 12; ++i) {
    std::vector<std::size_t> rows;
    std::vector<int> labels;
    for (Eigen::Index j = 0; j < 12; ++j)
      if (j != i) rows.push_back(static_cast<std::size_t>(j)), labels.push_back(b.labels[static_cast<std::size_t>(j)]);
    const auto model = train_ecoc(select_rows(b.X, rows), labels, kThree, {});
    EXPECT_EQ(predict_posterior(model, copy_row(b.X, i)).posterior, cv.posterior[static_cast<std::size_t>(i)]);
  }
}

TEST(CrossValidation, ClassSmallerThanFoldCount) {
  const auto b = blobs({9, 12}, 3, 1);
  EXPECT_EQ(kind_of([&] { cross_validate(b.X, b.labels, {"a", "b"}, 10); }), ErrorKind::InsufficientData);
}

// --- ROC -------------------------------------------------------------------------------

TEST(Roc, SeparatedAndConstantScores) {
  const std::vector<double> s{0.1, 0.2, 0.3, 0.7, 0.8, 0.9};
  const std::vector<int> y{-1, -1, -1, 1, 1, 1};
  EXPECT_EQ(roc_auc(s, y).auc, 1.0);
  const std::vector<double> flat(6, 0.4);
  EXPECT_EQ(roc_auc(flat, y).auc, 0.5);
}

TEST(Roc, EightHandScoresMatchPairCounting) {
  const std::vector<double> s{0.9, 0.8, 0.8, 0.6, 0.55, 0.4, 0.4, 0.1};
  const std::vector<int> y{1, 1, -1, 1, -1, -1, 1, -1};
  // 16 pairs: 11 wins, 2 ties -> 12/16.
  EXPECT_EQ(oracle::pair_auc({s.begin(), s.end()}, y), 12.0 / 16.0);
  EXPECT_EQ(roc_auc(s, y).auc, 12.0 / 16.0);
}

TEST(Roc, RandomSetsMatchPairCountingExactly) {
  std::mt19937 rng(77);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 2 + rng() % 99;
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = (rng() % 25) / 24.0;
      y[i] = rng() % 2 ? 1 : -1;
    }
    y[0] = 1;
    y[1] = -1;
    EXPECT_EQ(roc_auc(s, y).auc, oracle::pair_auc(s, y)) << t;
  }
}

TEST(Roc, GridShapeAndMonotoneInvariance) {
  std::mt19937 rng(4);
  std::vector<double> s(80);
  std::vector<int> y(80);
  for (std::size_t i = 0; i < 80; ++i) {
    y[i] = i % 2 ? 1 : -1;
    s[i] = std::clamp(0.5 + 0.2 * y[i] + ((rng() % 1000) / 1000.0 - 0.5) * 0.8, 0.0, 1.0);
  }
  const auto r = roc_auc(s, y);
  ASSERT_EQ(r.grid.size(), 101u);
  for (std::size_t i = 1; i < r.grid.size(); ++i) {
    EXPECT_LE(r.grid[i].tpr, r.grid[i - 1].tpr);
    EXPECT_LE(r.grid[i].fpr, r.grid[i - 1].fpr);
  }
  EXPECT_EQ(r.points.front(), (std::pair<double, double>{0.0, 0.0}));
  EXPECT_EQ(r.points.back(), (std::pair<double, double>{1.0, 1.0}));
  std::vector<double> t;
  for (double v : s) t.push_back(std::exp(3 * v) - 7);
  EXPECT_EQ(roc_auc(t, y).auc, r.auc);
}

TEST(Roc, SingleClass) {
  const std::vector<double> s{0.1, 0.2};
  const std::vector<int> y{1, 1};
  EXPECT_EQ(kind_of([&] { roc_auc(s, y); }), ErrorKind::InsufficientData);
}
