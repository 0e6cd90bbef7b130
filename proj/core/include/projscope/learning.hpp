#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "projscope/metrics.hpp"

namespace projscope {

struct TrainingRow {
  MetricVector metric;
  double rating = 0.0;
  std::string projection_id;
};

struct TrainingSet {
  std::string user_id;
  std::vector<TrainingRow> rows;
};

inline constexpr std::size_t kMinTrainingRows = 8;

/// Throws DataError if there are fewer than 8 rows or a rating is outside [1, 5].
void validate(const TrainingSet& t);

/// m x 3 design matrix of (sc, stress, np) and the rating vector.
Eigen::MatrixXd design_matrix(const std::vector<TrainingRow>& rows);
Eigen::VectorXd rating_vector(const std::vector<TrainingRow>& rows);

enum class ModelKind { ols, ridge, lasso };
std::string to_string(ModelKind k);
ModelKind parse_model_kind(const std::string& s);

struct RegressionModel {
  std::string user_id;
  ModelKind kind = ModelKind::ols;
  WeightVector weights;
  double lambda = 0.0;
  double cv_rmse = 0.0;
  double test_rmse = 0.0;
  double test_mae = 0.0;
  /// |y - y_hat| on the held-out rows, in split order.
  std::vector<double> test_abs_errors;
};

/// Least squares on [1, X] by column-pivoted Householder QR. Throws DataError
/// naming the collinear columns if the design is rank deficient.
RegressionModel fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

/// Minimises |y - Xw|^2 + lambda * |w_{sc,stress,np}|^2; the bias is not penalised.
RegressionModel fit_ridge(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda);

/// Smallest lambda at which fit_lasso() returns all-zero non-bias weights:
/// max_j |Z_j^T (y - mean(y))| over the standardized columns Z_j.
double lasso_lambda_max(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

struct LassoOptions {
  double tolerance = 1e-8;
  int max_sweeps = 10000;
};

/// Coordinate descent for 1/2 |y - b - Zw|^2 + lambda |w|_1 on centred,
/// unit-variance columns Z; weights are mapped back to the original scale.
/// Every 25 sweeps the optimality conditions are solved exactly over the
/// sign patterns of the weights; a pattern that satisfies them ends the descent.
/// Throws ConvergenceError if the sweep budget is exhausted.
RegressionModel fit_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                          const LassoOptions& opts = {});

RegressionModel fit(ModelKind kind, const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda);

/// 13 points, log-spaced from 1e-3 to 1e3.
std::vector<double> default_lambda_grid();

/// Fold index of every row: a seeded shuffle dealt round-robin into `folds`.
std::vector<int> assign_folds(std::size_t rows, int folds, std::uint64_t seed);

struct CvResult {
  double best_lambda = 0.0;
  double cv_rmse = 0.0;
  std::vector<double> rmse_per_lambda;
};

/// Mean held-out RMSE for every lambda in the grid (OLS ignores the grid and
/// reports lambda = 0). Exact ties resolve toward the larger lambda.
CvResult cross_validate(ModelKind kind, const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int folds,
                        const std::vector<double>& lambda_grid, std::uint64_t fold_seed = 0);

struct SelectionOptions {
  double train_fraction = 0.8;
  int folds = 5;
  std::vector<double> lambda_grid = default_lambda_grid();
  /// A later kind (ols < ridge < lasso) must beat the incumbent's CV RMSE by
  /// more than this to be selected.
  double tie_tolerance = 1e-9;
};

/// Seeded 80/20 split, per-kind CV on the training part, refit of the winner
/// on the whole training part, scoring on the untouched test part.
RegressionModel select_model(const TrainingSet& training, std::uint64_t split_seed,
                             const SelectionOptions& opts = {});

/// Same formula as composite(); no clamping.
double predict_rating(const RegressionModel& model, const MetricVector& m) noexcept;

struct Histogram {
  std::vector<double> edges;
  std::vector<int> counts;
};

inline constexpr double kErrorBinWidth = 0.25;

/// Bins |errors| in 0.25-wide bins starting at 0; the last bin contains the
/// largest error.
Histogram error_histogram(const std::vector<double>& abs_errors, double bin_width = kErrorBinWidth);

/// Absolute errors of `model` over `rows`, binned by error_histogram().
Histogram mae_distribution(const RegressionModel& model, const std::vector<TrainingRow>& rows);

}  // namespace projscope
