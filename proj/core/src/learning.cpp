#include "projscope/learning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "projscope/error.hpp"
#include "projscope/rng.hpp"

namespace projscope {
namespace {

constexpr const char* kColumnNames[] = {"bias", "sc", "stress", "np"};
constexpr Eigen::Index kMinFitRows = 4;

Eigen::MatrixXd augment(const Eigen::MatrixXd& X) {
  Eigen::MatrixXd z(X.rows(), X.cols() + 1);
  z.col(0).setOnes();
  z.rightCols(X.cols()) = X;
  return z;
}

void check_shapes(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.cols() != 3) throw ArgumentError("design matrix must have 3 columns (sc, stress, np)");
  if (X.rows() != y.size()) throw ArgumentError("design matrix and ratings differ in length");
  if (X.rows() < kMinFitRows)
    throw ArgumentError("regression needs at least " + std::to_string(kMinFitRows) + " rows, got " +
                        std::to_string(X.rows()));
}

WeightVector to_weights(const Eigen::Vector4d& w) { return {w(0), w(1), w(2), w(3)}; }

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = m.row(rows[r]);
  return out;
}

Eigen::VectorXd take_rows(const Eigen::VectorXd& v, const std::vector<Eigen::Index>& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) out(static_cast<Eigen::Index>(r)) = v(rows[r]);
  return out;
}

Eigen::VectorXd predict(const WeightVector& w, const Eigen::MatrixXd& X) {
  Eigen::VectorXd out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const MetricVector m{X(i, 0), X(i, 1), X(i, 2)};
    out(i) = composite(m, w);
  }
  return out;
}

double rmse(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.size()));
}

}  // namespace

void validate(const TrainingSet& t) {
  if (t.rows.size() < kMinTrainingRows) {
    throw DataError("training set for '" + t.user_id + "' has " + std::to_string(t.rows.size()) +
                    " rows, at least " + std::to_string(kMinTrainingRows) + " required");
  }
  for (const auto& r : t.rows) {
    if (!(r.rating >= 1.0 && r.rating <= 5.0))
      throw DataError("rating for '" + r.projection_id + "' outside [1, 5]");
  }
}

Eigen::MatrixXd design_matrix(const std::vector<TrainingRow>& rows) {
  Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), 3);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    X(r, 0) = rows[i].metric.sc;
    X(r, 1) = rows[i].metric.stress;
    X(r, 2) = rows[i].metric.np;
  }
  return X;
}

Eigen::VectorXd rating_vector(const std::vector<TrainingRow>& rows) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) y(static_cast<Eigen::Index>(i)) = rows[i].rating;
  return y;
}

std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::ols: return "ols";
    case ModelKind::ridge: return "ridge";
    case ModelKind::lasso: return "lasso";
  }
  return "ols";
}

ModelKind parse_model_kind(const std::string& s) {
  if (s == "ols") return ModelKind::ols;
  if (s == "ridge") return ModelKind::ridge;
  if (s == "lasso") return ModelKind::lasso;
  throw DataError("unknown model kind '" + s + "'");
}

RegressionModel fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  check_shapes(X, y);
  const Eigen::MatrixXd z = augment(X);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(z);
  qr.setThreshold(1e-10);
  if (qr.rank() < z.cols()) {
    std::ostringstream os;
    os << "rank-deficient design (rank " << qr.rank() << " of " << z.cols() << "); collinear columns:";
    const auto& perm = qr.colsPermutation().indices();
    const Eigen::Index rank = qr.rank();
    Eigen::MatrixXd basis(z.rows(), rank);
    for (Eigen::Index i = 0; i < rank; ++i) basis.col(i) = z.col(perm(i));
    const auto basis_qr = basis.colPivHouseholderQr();
    std::vector<bool> involved(static_cast<std::size_t>(z.cols()), false);
    for (Eigen::Index i = rank; i < z.cols(); ++i) {
      involved[static_cast<std::size_t>(perm(i))] = true;
      const Eigen::VectorXd coef = basis_qr.solve(z.col(perm(i)));
      for (Eigen::Index b = 0; b < rank; ++b)
        if (std::abs(coef(b)) > 1e-8) involved[static_cast<std::size_t>(perm(b))] = true;
    }
    for (std::size_t c = 0; c < involved.size(); ++c)
      if (involved[c]) os << ' ' << kColumnNames[c];
    throw DataError(os.str());
  }
  RegressionModel m;
  m.kind = ModelKind::ols;
  m.weights = to_weights(qr.solve(y));
  return m;
}

RegressionModel fit_ridge(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda) {
  check_shapes(X, y);
  if (!(lambda >= 0.0)) throw ArgumentError("ridge lambda must be non-negative");
  const Eigen::MatrixXd z = augment(X);
  Eigen::Matrix4d a = z.transpose() * z;
  for (int j = 1; j < 4; ++j) a(j, j) += lambda;
  const Eigen::Vector4d rhs = z.transpose() * y;
  Eigen::LDLT<Eigen::Matrix4d> ldlt(a);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.vectorD().minCoeff() <= 0.0)
    throw DataError("ridge normal equations are singular; the design is rank deficient");
  RegressionModel m;
  m.kind = ModelKind::ridge;
  m.lambda = lambda;
  m.weights = to_weights(ldlt.solve(rhs));
  return m;
}

namespace {

struct Standardized {
  Eigen::MatrixXd z;
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;
  Eigen::VectorXd yc;
  double y_mean = 0.0;
};

Standardized standardize_columns(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  Standardized s;
  const double m = static_cast<double>(X.rows());
  s.mean = X.colwise().mean();
  s.z = X.rowwise() - s.mean;
  s.scale = (s.z.colwise().squaredNorm() / m).cwiseSqrt();
  for (Eigen::Index j = 0; j < X.cols(); ++j)
    if (s.scale(j) > 0.0) s.z.col(j) /= s.scale(j);
  s.y_mean = y.mean();
  s.yc = y.array() - s.y_mean;
  return s;
}

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

constexpr int kPolishInterval = 25;

/// Exact solve of the KKT system for one sign pattern (0 = inactive). Accepts
/// the result only if the signs hold and every inactive coordinate satisfies
/// |z_j . r| <= lambda.
bool solve_pattern(const Standardized& s, double lambda, const std::vector<int>& pattern, Eigen::VectorXd& beta,
                   Eigen::VectorXd& resid) {
  std::vector<Eigen::Index> active;
  for (std::size_t j = 0; j < pattern.size(); ++j)
    if (pattern[j] != 0) active.push_back(static_cast<Eigen::Index>(j));
  Eigen::VectorXd candidate = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(pattern.size()));
  if (!active.empty()) {
    const auto k = static_cast<Eigen::Index>(active.size());
    Eigen::MatrixXd za(s.z.rows(), k);
    Eigen::VectorXd sign(k);
    for (Eigen::Index a = 0; a < k; ++a) {
      za.col(a) = s.z.col(active[a]);
      sign(a) = pattern[static_cast<std::size_t>(active[a])];
    }
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(za.transpose() * za);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return false;
    const Eigen::VectorXd ba = ldlt.solve(za.transpose() * s.yc - lambda * sign);
    if (!ba.allFinite()) return false;
    for (Eigen::Index a = 0; a < k; ++a) {
      if (ba(a) * sign(a) <= 0.0) return false;
      candidate(active[a]) = ba(a);
    }
  }
  const Eigen::VectorXd r = s.yc - s.z * candidate;
  const double slack = 1e-9 * std::max(1.0, lambda);
  for (std::size_t j = 0; j < pattern.size(); ++j) {
    const auto c = static_cast<Eigen::Index>(j);
    if (pattern[j] == 0 && s.scale(c) > 0.0 && std::abs(s.z.col(c).dot(r)) > lambda + slack) return false;
  }
  beta = candidate;
  resid = r;
  return true;
}

/// Tries the current sign pattern first, then every other pattern in
/// {-1, 0, 1}^p. With full column rank at most one pattern passes.
bool polish_active_set(const Standardized& s, double lambda, Eigen::VectorXd& beta, Eigen::VectorXd& resid) {
  const auto p = static_cast<std::size_t>(beta.size());
  std::vector<int> current(p);
  for (std::size_t j = 0; j < p; ++j) {
    const double b = beta(static_cast<Eigen::Index>(j));
    current[j] = b > 0.0 ? 1 : (b < 0.0 ? -1 : 0);
  }
  if (solve_pattern(s, lambda, current, beta, resid)) return true;
  std::size_t total = 1;
  for (std::size_t j = 0; j < p; ++j) total *= 3;
  for (std::size_t code = 0; code < total; ++code) {
    std::vector<int> pattern(p);
    std::size_t rest = code;
    for (std::size_t j = 0; j < p; ++j) {
      pattern[j] = static_cast<int>(rest % 3) - 1;
      rest /= 3;
    }
    if (pattern != current && solve_pattern(s, lambda, pattern, beta, resid)) return true;
  }
  return false;
}

}  // namespace

double lasso_lambda_max(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  check_shapes(X, y);
  const Standardized s = standardize_columns(X, y);
  double best = 0.0;
  for (Eigen::Index j = 0; j < X.cols(); ++j)
    if (s.scale(j) > 0.0) best = std::max(best, std::abs(s.z.col(j).dot(s.yc)));
  return best;
}

RegressionModel fit_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                          const LassoOptions& opts) {
  check_shapes(X, y);
  if (!(lambda >= 0.0)) throw ArgumentError("lasso lambda must be non-negative");
  const Standardized s = standardize_columns(X, y);
  const Eigen::Index p = X.cols();
  const double m = static_cast<double>(X.rows());

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd resid = s.yc;
  bool converged = false;
  int sweep = 0;
  for (; sweep < opts.max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (s.scale(j) <= 0.0) continue;
      const double rho = s.z.col(j).dot(resid) + m * beta(j);
      const double updated = soft_threshold(rho, lambda) / m;
      const double delta = updated - beta(j);
      if (delta != 0.0) {
        resid -= delta * s.z.col(j);
        beta(j) = updated;
      }
      max_change = std::max(max_change, std::abs(delta));
    }
    if (max_change < opts.tolerance) {
      converged = true;
      break;
    }
    if ((sweep + 1) % kPolishInterval == 0 && polish_active_set(s, lambda, beta, resid)) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw ConvergenceError("lasso coordinate descent did not converge after " + std::to_string(sweep) + " sweeps",
                           sweep);
  }

  Eigen::Vector4d w = Eigen::Vector4d::Zero();
  for (Eigen::Index j = 0; j < p; ++j)
    if (s.scale(j) > 0.0) w(j + 1) = beta(j) / s.scale(j);
  w(0) = s.y_mean - s.mean.dot(w.tail(3));

  RegressionModel model;
  model.kind = ModelKind::lasso;
  model.lambda = lambda;
  model.weights = to_weights(w);
  return model;
}

RegressionModel fit(ModelKind kind, const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda) {
  switch (kind) {
    case ModelKind::ols: return fit_ols(X, y);
    case ModelKind::ridge: return fit_ridge(X, y, lambda);
    case ModelKind::lasso: return fit_lasso(X, y, lambda);
  }
  return fit_ols(X, y);
}

std::vector<double> default_lambda_grid() {
  std::vector<double> grid;
  for (int i = 0; i < 13; ++i) grid.push_back(std::pow(10.0, -3.0 + 0.5 * i));
  return grid;
}

std::vector<int> assign_folds(std::size_t rows, int folds, std::uint64_t seed) {
  if (folds < 2) throw ArgumentError("cross-validation needs at least 2 folds");
  if (static_cast<std::size_t>(folds) > rows) throw ArgumentError("more folds than rows");
  std::vector<std::size_t> order(rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, {0xf01d}));
  rng.shuffle(order);
  std::vector<int> fold(rows);
  for (std::size_t i = 0; i < rows; ++i) fold[order[i]] = static_cast<int>(i % static_cast<std::size_t>(folds));
  return fold;
}

CvResult cross_validate(ModelKind kind, const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int folds,
                        const std::vector<double>& lambda_grid, std::uint64_t fold_seed) {
  if (lambda_grid.empty()) throw ArgumentError("cross-validation needs a non-empty lambda grid");
  if (X.rows() != y.size()) throw ArgumentError("design matrix and ratings differ in length");
  const std::vector<int> fold = assign_folds(static_cast<std::size_t>(X.rows()), folds, fold_seed);

  std::vector<std::vector<Eigen::Index>> train(static_cast<std::size_t>(folds));
  std::vector<std::vector<Eigen::Index>> held(static_cast<std::size_t>(folds));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (int f = 0; f < folds; ++f) {
      auto& bucket = fold[static_cast<std::size_t>(i)] == f ? held : train;
      bucket[static_cast<std::size_t>(f)].push_back(i);
    }
  }

  const std::vector<double> grid = kind == ModelKind::ols ? std::vector<double>{0.0} : lambda_grid;
  CvResult res;
  res.best_lambda = grid.front();
  res.cv_rmse = std::numeric_limits<double>::infinity();
  for (double lambda : grid) {
    double total = 0.0;
    for (int f = 0; f < folds; ++f) {
      const auto& tr = train[static_cast<std::size_t>(f)];
      const auto& te = held[static_cast<std::size_t>(f)];
      const RegressionModel m = fit(kind, take_rows(X, tr), take_rows(y, tr), lambda);
      total += rmse(predict(m.weights, take_rows(X, te)), take_rows(y, te));
    }
    const double mean = total / folds;
    res.rmse_per_lambda.push_back(mean);
    if (mean < res.cv_rmse || (mean == res.cv_rmse && lambda > res.best_lambda)) {
      res.cv_rmse = mean;
      res.best_lambda = lambda;
    }
  }
  return res;
}

RegressionModel select_model(const TrainingSet& training, std::uint64_t split_seed, const SelectionOptions& opts) {
  validate(training);
  const Eigen::MatrixXd X = design_matrix(training.rows);
  const Eigen::VectorXd y = rating_vector(training.rows);
  const auto m = static_cast<std::size_t>(X.rows());

  std::vector<Eigen::Index> order(m);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Rng rng(derive_seed(split_seed, {0x5b117}));
  rng.shuffle(order);
  auto n_train = static_cast<std::size_t>(std::lround(opts.train_fraction * static_cast<double>(m)));
  n_train = std::clamp<std::size_t>(n_train, static_cast<std::size_t>(kMinFitRows), m - 1);
  const std::vector<Eigen::Index> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  const std::vector<Eigen::Index> test(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  const Eigen::MatrixXd x_train = take_rows(X, train);
  const Eigen::VectorXd y_train = take_rows(y, train);
  const int folds = std::min<int>(opts.folds, static_cast<int>(n_train));

  ModelKind best_kind = ModelKind::ols;
  CvResult best_cv;
  bool have = false;
  for (ModelKind kind : {ModelKind::ols, ModelKind::ridge, ModelKind::lasso}) {
    const CvResult cv = cross_validate(kind, x_train, y_train, folds, opts.lambda_grid, derive_seed(split_seed, {0xcf}));
    if (!have || cv.cv_rmse < best_cv.cv_rmse - opts.tie_tolerance) {
      best_kind = kind;
      best_cv = cv;
      have = true;
    }
  }

  RegressionModel model = fit(best_kind, x_train, y_train, best_cv.best_lambda);
  model.user_id = training.user_id;
  model.lambda = best_kind == ModelKind::ols ? 0.0 : best_cv.best_lambda;
  model.cv_rmse = best_cv.cv_rmse;

  const Eigen::VectorXd y_test = take_rows(y, test);
  const Eigen::VectorXd pred = predict(model.weights, take_rows(X, test));
  model.test_rmse = rmse(pred, y_test);
  model.test_abs_errors.clear();
  double abs_sum = 0.0;
  for (Eigen::Index i = 0; i < y_test.size(); ++i) {
    const double e = std::abs(y_test(i) - pred(i));
    model.test_abs_errors.push_back(e);
    abs_sum += e;
  }
  model.test_mae = abs_sum / static_cast<double>(y_test.size());
  return model;
}

double predict_rating(const RegressionModel& model, const MetricVector& m) noexcept {
  return composite(m, model.weights);
}

Histogram error_histogram(const std::vector<double>& abs_errors, double bin_width) {
  if (abs_errors.empty()) throw ArgumentError("error histogram needs at least one value");
  if (!(bin_width > 0.0)) throw ArgumentError("histogram bin width must be positive");
  const double max_err = *std::max_element(abs_errors.begin(), abs_errors.end());
  const auto bins = static_cast<std::size_t>(std::floor(max_err / bin_width)) + 1;
  Histogram h;
  h.counts.assign(bins, 0);
  for (std::size_t b = 0; b <= bins; ++b) h.edges.push_back(static_cast<double>(b) * bin_width);
  for (double e : abs_errors) {
    auto b = static_cast<std::size_t>(std::floor(std::abs(e) / bin_width));
    h.counts[std::min(b, bins - 1)] += 1;
  }
  return h;
}

Histogram mae_distribution(const RegressionModel& model, const std::vector<TrainingRow>& rows) {
  std::vector<double> errs;
  errs.reserve(rows.size());
  for (const auto& r : rows) errs.push_back(std::abs(r.rating - predict_rating(model, r.metric)));
  return error_histogram(errs);
}

}  // namespace projscope
