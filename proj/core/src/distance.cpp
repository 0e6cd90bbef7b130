#include "projscope/distance.hpp"

#include <cmath>

namespace projscope {

double DistanceMatrix::sum_squares() const noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    const double* r = row(i);
    for (std::size_t j = i + 1; j < n_; ++j) s += r[j] * r[j];
  }
  return s;
}

bool DistanceMatrix::all_zero() const noexcept {
  for (double v : values_)
    if (v != 0.0) return false;
  return true;
}

DistanceMatrix pairwise_distances(const Eigen::MatrixXd& points) {
  const auto n = static_cast<std::size_t>(points.rows());
  const Eigen::Index dims = points.cols();
  // Row-major copy so each pair walks contiguous memory.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> p = points;
  DistanceMatrix d(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* a = p.data() + i * dims;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double* b = p.data() + j * dims;
      double s = 0.0;
      for (Eigen::Index c = 0; c < dims; ++c) {
        const double diff = a[c] - b[c];
        s += diff * diff;
      }
      d.set(i, j, std::sqrt(s));
    }
  }
  return d;
}

}  // namespace projscope
