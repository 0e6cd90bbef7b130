#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace projscope {

/// Symmetric Euclidean distance matrix with a zero diagonal.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::size_t n) : n_(n), values_(n * n, 0.0) {}

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * n_ + j]; }

  /// Sets both (i, j) and (j, i).
  void set(std::size_t i, std::size_t j, double v) noexcept {
    values_[i * n_ + j] = v;
    values_[j * n_ + i] = v;
  }

  const double* row(std::size_t i) const noexcept { return values_.data() + i * n_; }

  /// Sum over unordered pairs i < j of d_ij^2.
  double sum_squares() const noexcept;
  bool all_zero() const noexcept;

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
};

/// Euclidean distances between the rows of `points`.
DistanceMatrix pairwise_distances(const Eigen::MatrixXd& points);

}  // namespace projscope
