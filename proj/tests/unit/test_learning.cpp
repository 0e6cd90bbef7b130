#include <algorithm>
#include <chrono>
#include <numeric>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "projscope/error.hpp"
#include "projscope/learning.hpp"
#include "projscope/metrics.hpp"

using namespace projscope;

namespace {

const WeightVector kU1{1.820, 2.993, 0.314, 0.086};
const WeightVector kU2{2.230, 2.433, -0.089, 0.812};

/// Ten fixed rows of (sc, stress, np) and ratings.
const std::vector<std::array<double, 3>> kFixtureX{
    {0.21, 0.49, 0.67}, {0.34, 0.41, 0.72}, {0.55, 0.33, 0.75}, {0.54, 0.39, 0.75}, {0.43, 0.06, 0.69},
    {0.41, 0.11, 0.74}, {0.49, 0.30, 0.62}, {0.54, 0.45, 0.73}, {0.02, 0.40, 0.09}, {0.35, 0.52, 0.58}};
const std::vector<double> kFixtureY{2.5, 3.0, 4.0, 3.5, 3.0, 3.5, 3.0, 4.5, 1.0, 3.0};

Eigen::MatrixXd fixture_x() {
  Eigen::MatrixXd X(10, 3);
  for (int r = 0; r < 10; ++r)
    for (int c = 0; c < 3; ++c) X(r, c) = kFixtureX[r][c];
  return X;
}

Eigen::VectorXd fixture_y() { return Eigen::Map<const Eigen::VectorXd>(kFixtureY.data(), 10); }

Eigen::MatrixXd random_metrics(std::mt19937_64& gen, int m) {
  std::uniform_real_distribution<double> sc(0.0, 0.6), st(0.05, 0.55), np(0.1, 0.8);
  Eigen::MatrixXd X(m, 3);
  for (int r = 0; r < m; ++r) X.row(r) << sc(gen), st(gen), np(gen);
  return X;
}

Eigen::VectorXd apply(const WeightVector& w, const Eigen::MatrixXd& X) {
  return (X * Eigen::Vector3d(w.w2, w.w3, w.w4)).array() + w.w1;
}

TrainingSet to_training(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  TrainingSet t;
  t.user_id = "synthetic";
  for (Eigen::Index r = 0; r < X.rows(); ++r)
    t.rows.push_back({{X(r, 0), X(r, 1), X(r, 2), 7}, y(r), "p" + std::to_string(r)});
  return t;
}

double linf(const WeightVector& a, const WeightVector& b) {
  return std::max({std::abs(a.w1 - b.w1), std::abs(a.w2 - b.w2), std::abs(a.w3 - b.w3), std::abs(a.w4 - b.w4)});
}

double non_bias_norm(const WeightVector& w) { return std::sqrt(w.w2 * w.w2 + w.w3 * w.w3 + w.w4 * w.w4); }

}  // namespace

TEST(Ols, NoiselessRecoveryIsExact) {
  std::mt19937_64 gen(1);
  const Eigen::MatrixXd X = random_metrics(gen, 30);
  const RegressionModel m = fit_ols(X, apply(kU1, X));
  EXPECT_LE(linf(m.weights, kU1), 1e-10);
  EXPECT_EQ(m.lambda, 0.0);
  EXPECT_EQ(m.kind, ModelKind::ols);
}

TEST(Ols, ConstantRatings) {
  std::mt19937_64 gen(2);
  const Eigen::MatrixXd X = random_metrics(gen, 12);
  const RegressionModel m = fit_ols(X, Eigen::VectorXd::Constant(12, 3.0));
  EXPECT_LE(linf(m.weights, {3.0, 0, 0, 0}), 1e-12);
}

TEST(Ols, CollinearColumnsNamed) {
  std::mt19937_64 gen(3);
  Eigen::MatrixXd X = random_metrics(gen, 12);
  X.col(2) = 2.0 * X.col(0);
  try {
    fit_ols(X, Eigen::VectorXd::LinSpaced(12, 1, 5));
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("np"), std::string::npos) << msg;
    EXPECT_NE(msg.find("sc"), std::string::npos) << msg;
  }
}

TEST(Ols, NoisyRecoveryWithinTolerance) {
  std::mt19937_64 gen(4);
  std::normal_distribution<double> noise(0.0, 0.05);
  const Eigen::MatrixXd X = random_metrics(gen, 400);
  Eigen::VectorXd y = apply(kU1, X);
  for (auto& v : y) v += noise(gen);
  EXPECT_LE(linf(fit_ols(X, y).weights, kU1), 0.1);
}

TEST(Ridge, ZeroPenaltyEqualsOls) {
  const RegressionModel o = fit_ols(fixture_x(), fixture_y());
  const RegressionModel r = fit_ridge(fixture_x(), fixture_y(), 0.0);
  EXPECT_LE(linf(o.weights, r.weights), 1e-8);
}

TEST(Ridge, UnitPenaltyMatchesNormalEquations) {
  const auto w = oracle::ridge(kFixtureX, kFixtureY, 1.0);
  const RegressionModel r = fit_ridge(fixture_x(), fixture_y(), 1.0);
  EXPECT_NEAR(r.weights.w1, w[0], 1e-10);
  EXPECT_NEAR(r.weights.w2, w[1], 1e-10);
  EXPECT_NEAR(r.weights.w3, w[2], 1e-10);
  EXPECT_NEAR(r.weights.w4, w[3], 1e-10);
  // Frozen from an independent numpy solve of the same 4x4 system.
  EXPECT_NEAR(r.weights.w1, 2.20429065050793, 1e-9);
  EXPECT_NEAR(r.weights.w2, 0.85816435178629, 1e-9);
  EXPECT_NEAR(r.weights.w3, -0.0305442181603236, 1e-9);
  EXPECT_NEAR(r.weights.w4, 0.904274259436058, 1e-9);
}

TEST(Ridge, InfinitePenaltyLeavesMean) {
  const RegressionModel r = fit_ridge(fixture_x(), fixture_y(), 1e9);
  EXPECT_NEAR(r.weights.w1, fixture_y().mean(), 1e-6);
  EXPECT_LT(non_bias_norm(r.weights), 1e-6);
}

TEST(Ridge, NormShrinksAlongGrid) {
  double prev = 1e300;
  for (double lambda : default_lambda_grid()) {
    const double n = non_bias_norm(fit_ridge(fixture_x(), fixture_y(), lambda).weights);
    EXPECT_LE(n, prev);
    prev = n;
  }
}

TEST(Lasso, ZeroPenaltyEqualsOls) {
  const RegressionModel o = fit_ols(fixture_x(), fixture_y());
  const RegressionModel l = fit_lasso(fixture_x(), fixture_y(), 0.0);
  EXPECT_LE(linf(o.weights, l.weights), 1e-6);
}

TEST(Lasso, CriticalPenaltyZeroesWeights) {
  const Eigen::MatrixXd X = fixture_x();
  const Eigen::VectorXd y = fixture_y();
  // lambda_max from the standardized fixture, computed directly.
  double lmax = 0.0;
  const Eigen::VectorXd yc = y.array() - y.mean();
  for (int c = 0; c < 3; ++c) {
    const Eigen::VectorXd col = X.col(c).array() - X.col(c).mean();
    const Eigen::VectorXd z = col / std::sqrt(col.squaredNorm() / 10.0);
    lmax = std::max(lmax, std::abs(z.dot(yc)));
  }
  EXPECT_NEAR(lasso_lambda_max(X, y), lmax, 1e-12);
  for (double f : {1.0, 1.5, 10.0}) {
    const RegressionModel m = fit_lasso(X, y, f * lmax);
    EXPECT_EQ(m.weights.w2, 0.0);
    EXPECT_EQ(m.weights.w3, 0.0);
    EXPECT_EQ(m.weights.w4, 0.0);
    EXPECT_NEAR(m.weights.w1, y.mean(), 1e-12);
  }
  const RegressionModel below = fit_lasso(X, y, 0.9 * lmax);
  EXPECT_GT(non_bias_norm(below.weights), 0.0);
}

TEST(Lasso, PathShrinksWithPenalty) {
  const double lmax = lasso_lambda_max(fixture_x(), fixture_y());
  double prev_l1 = -1.0;
  for (double f = 1.0; f > 1e-4; f /= 2.0) {
    const WeightVector w = fit_lasso(fixture_x(), fixture_y(), f * lmax).weights;
    const double l1 = std::abs(w.w2) + std::abs(w.w3) + std::abs(w.w4);
    EXPECT_GE(l1, prev_l1);
    prev_l1 = l1;
  }
}

TEST(Lasso, SweepBudgetExhaustionReportsIterations) {
  LassoOptions opts;
  opts.max_sweeps = 1;
  opts.tolerance = 0.0;
  try {
    fit_lasso(fixture_x(), fixture_y(), 0.01, opts);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_EQ(e.iterations(), 1);
  }
}

TEST(Folds, PartitionRows) {
  const auto f = assign_folds(23, 5, 9);
  ASSERT_EQ(f.size(), 23u);
  std::vector<int> counts(5, 0);
  for (int v : f) {
    ASSERT_GE(v, 0);
    ASSERT_LT(v, 5);
    ++counts[v];
  }
  for (int c : counts) EXPECT_TRUE(c == 4 || c == 5);
  EXPECT_EQ(assign_folds(23, 5, 9), f);
}

TEST(CrossValidate, SingleLambda) {
  const CvResult r = cross_validate(ModelKind::ridge, fixture_x(), fixture_y(), 5, {0.7});
  EXPECT_EQ(r.best_lambda, 0.7);
  EXPECT_EQ(r.rmse_per_lambda.size(), 1u);
}

TEST(CrossValidate, EmptyGridRejected) {
  EXPECT_THROW(cross_validate(ModelKind::ridge, fixture_x(), fixture_y(), 5, {}), ArgumentError);
}

TEST(CrossValidate, NoiselessPicksSmallestLambda) {
  std::mt19937_64 gen(5);
  const Eigen::MatrixXd X = random_metrics(gen, 60);
  const std::vector<double> grid{1e-9, 1e-3, 1e-1, 10.0};
  const CvResult r = cross_validate(ModelKind::ridge, X, apply(kU1, X), 5, grid);
  EXPECT_EQ(r.best_lambda, 1e-9);
  EXPECT_LT(r.cv_rmse, 1e-6);
  const CvResult o = cross_validate(ModelKind::ols, X, apply(kU1, X), 5, grid);
  EXPECT_LT(o.cv_rmse, 1e-6);
  EXPECT_EQ(o.best_lambda, 0.0);
}

TEST(CrossValidate, NoisyRaterBand) {
  std::mt19937_64 gen(6);
  std::normal_distribution<double> noise(0.0, 0.3);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::MatrixXd X = random_metrics(gen, 120);
    Eigen::VectorXd y = apply(kU2, X);
    for (auto& v : y) v += noise(gen);
    const CvResult r = cross_validate(ModelKind::ridge, X, y, 5, default_lambda_grid(), rep);
    EXPECT_GE(r.cv_rmse, 0.25) << rep;
    EXPECT_LE(r.cv_rmse, 0.45) << rep;
  }
}

TEST(SelectModel, NoiselessPrefersOls) {
  std::mt19937_64 gen(7);
  const Eigen::MatrixXd X = random_metrics(gen, 120);
  const RegressionModel m = select_model(to_training(X, apply(kU1, X)), 3);
  EXPECT_EQ(m.kind, ModelKind::ols);
  EXPECT_LE(linf(m.weights, kU1), 1e-8);
  EXPECT_EQ(m.test_abs_errors.size(), 24u);
  EXPECT_LT(m.test_rmse, 1e-8);
}

TEST(SelectModel, CorrelatedDenseDesignPrefersRidge) {
  // Three correlated columns sharing equal true weights.
  int ridge = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    const int m = 120;
    Eigen::MatrixXd X(m, 3);
    Eigen::VectorXd y(m);
    for (int r = 0; r < m; ++r) {
      const double base = 0.3 + 0.1 * g(gen);
      X.row(r) << base + 0.1 * g(gen), base + 0.1 * g(gen), base + 0.1 * g(gen);
      y(r) = std::clamp(3.0 + X.row(r).sum() + 0.2 * g(gen), 1.0, 5.0);
    }
    const RegressionModel model = select_model(to_training(X, y), seed);
    if (model.kind == ModelKind::ridge) {
      ++ridge;
      EXPECT_GT(model.lambda, 0.0);
    }
  }
  EXPECT_GE(ridge, 9);
}

TEST(SelectModel, TooFewRows) {
  std::mt19937_64 gen(9);
  const Eigen::MatrixXd X = random_metrics(gen, 7);
  EXPECT_THROW(select_model(to_training(X, apply(kU1, X)), 1), DataError);
}

TEST(SelectModel, OutOfRangeRatingRejected) {
  std::mt19937_64 gen(10);
  const Eigen::MatrixXd X = random_metrics(gen, 12);
  Eigen::VectorXd y = Eigen::VectorXd::Constant(12, 3.0);
  y(4) = 5.5;
  EXPECT_THROW(select_model(to_training(X, y), 1), DataError);
}

TEST(SelectModel, HundredTwentyRowsIsQuick) {
  std::mt19937_64 gen(11);
  std::normal_distribution<double> noise(0.0, 0.2);
  const Eigen::MatrixXd X = random_metrics(gen, 120);
  Eigen::VectorXd y = apply(kU2, X);
  for (auto& v : y) v += noise(gen);
  const auto t0 = std::chrono::steady_clock::now();
  select_model(to_training(X, y), 4);
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 5.0);
}

TEST(Predict, PublishedWeights) {
  RegressionModel u1;
  u1.weights = kU1;
  EXPECT_NEAR(predict_rating(u1, {1.0, 0.0, 1.0, 7}), 4.899, 1e-12);
  RegressionModel u2;
  u2.weights = kU2;
  EXPECT_NEAR(predict_rating(u2, {0.0, 0.0, 0.0, 7}), 2.230, 1e-15);
}

TEST(Predict, SameAsComposite) {
  std::mt19937_64 gen(12);
  RegressionModel m;
  m.weights = kU2;
  const Eigen::MatrixXd X = random_metrics(gen, 20);
  for (int r = 0; r < 20; ++r) {
    const MetricVector v{X(r, 0), X(r, 1), X(r, 2), 7};
    EXPECT_EQ(predict_rating(m, v), composite(v, kU2));
  }
}

TEST(Predict, FitThenPredictIsIdentityOnNoiselessData) {
  std::mt19937_64 gen(13);
  const Eigen::MatrixXd X = random_metrics(gen, 25);
  const Eigen::VectorXd y = apply(kU2, X);
  const RegressionModel m = fit_ols(X, y);
  for (int r = 0; r < 25; ++r) EXPECT_NEAR(predict_rating(m, {X(r, 0), X(r, 1), X(r, 2), 7}), y(r), 1e-8);
}

TEST(Histogram, PerfectModelSingleBin) {
  std::mt19937_64 gen(14);
  const Eigen::MatrixXd X = random_metrics(gen, 10);
  RegressionModel m;
  m.weights = kU1;
  const Histogram h = mae_distribution(m, to_training(X, apply(kU1, X)).rows);
  ASSERT_EQ(h.counts.size(), 1u);
  EXPECT_EQ(h.counts[0], 10);
  EXPECT_EQ(h.edges[0], 0.0);
  EXPECT_EQ(h.edges[1], 0.25);
}

TEST(Histogram, CountsConserveRows) {
  std::mt19937_64 gen(15);
  const Eigen::MatrixXd X = random_metrics(gen, 33);
  Eigen::VectorXd y(33);
  for (int r = 0; r < 33; ++r) y(r) = 1.0 + (r % 5);
  RegressionModel m;
  m.weights = {3.0, 0, 0, 0};
  const Histogram h = mae_distribution(m, to_training(X, y).rows);
  EXPECT_EQ(std::accumulate(h.counts.begin(), h.counts.end(), 0), 33);
  EXPECT_EQ(h.edges.size(), h.counts.size() + 1);
  EXPECT_GE(h.edges.back(), 2.0);
}

TEST(Histogram, NoisyRaterModalBinIsFirst) {
  std::mt19937_64 gen(16);
  std::normal_distribution<double> noise(0.0, 0.15);
  const Eigen::MatrixXd X = random_metrics(gen, 200);
  Eigen::VectorXd y = apply(kU1, X);
  for (auto& v : y) v += noise(gen);
  const RegressionModel m = fit_ols(X, y);
  const Histogram h = mae_distribution(m, to_training(X, y).rows);
  EXPECT_EQ(std::max_element(h.counts.begin(), h.counts.end()) - h.counts.begin(), 0);
}
