#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "projscope/distance.hpp"

namespace projscope {

inline constexpr int kDefaultNeighborhoodSize = 7;

/// Silhouette, stress and neighborhood preservation of one projection.
struct MetricVector {
  double sc = 0.0;
  double stress = 0.0;
  double np = 0.0;
  int np_k = kDefaultNeighborhoodSize;
};

/// Weights of the composite score: w1 is the bias, then SC, Stress, NP.
struct WeightVector {
  double w1 = 0.0;
  double w2 = 0.0;
  double w3 = 0.0;
  double w4 = 0.0;

  friend bool operator==(const WeightVector&, const WeightVector&) = default;
};

struct SilhouetteReport {
  std::vector<double> s;
  std::vector<double> a;
  std::vector<double> b;
  double overall = 0.0;
};

/// sqrt( sum_{i<j} (d_ij - d'_ij)^2 / sum_{i<j} d_ij^2 ).
/// Throws ArgumentError on size mismatch or an all-zero d_high.
double stress(const DistanceMatrix& d_high, const DistanceMatrix& d_low);

/// Mean fraction of each point's k nearest neighbours shared between the two
/// spaces. Neighbour sets exclude the point itself; distance ties go to the
/// lower index. Requires 1 <= k <= n-1.
double neighborhood_preservation(const DistanceMatrix& d_high, const DistanceMatrix& d_low, int k);

/// k nearest neighbours of every point, each list ordered by (distance, index).
std::vector<std::vector<int>> nearest_neighbors(const DistanceMatrix& d, int k);

/// Same as neighborhood_preservation() with the high-dimensional neighbour
/// lists precomputed.
double neighborhood_preservation(const std::vector<std::vector<int>>& knn_high,
                                 const DistanceMatrix& d_low, int k);

/// Silhouette of `coords` using `labels` as clusters. Points in a singleton
/// cluster score 0. Throws ArgumentError with fewer than two clusters.
SilhouetteReport silhouette(const Eigen::MatrixXd& coords, std::span<const int> labels);

/// Same, reading point distances from a precomputed matrix.
SilhouetteReport silhouette(const DistanceMatrix& d, std::span<const int> labels);

/// w1 + w2*sc + w3*stress + w4*np.
double composite(const MetricVector& m, const WeightVector& w) noexcept;

/// All three metrics of a projection. `d_high` must be the distance matrix of
/// the data the coordinates were produced from.
MetricVector evaluate_projection(const DistanceMatrix& d_high, const Eigen::MatrixXd& coords,
                                 std::span<const int> labels, int k = kDefaultNeighborhoodSize);

}  // namespace projscope
