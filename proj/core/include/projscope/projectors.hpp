#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "projscope/dataset.hpp"
#include "projscope/distance.hpp"
#include "projscope/projection.hpp"

namespace projscope {

// ---------------------------------------------------------------------------
// t-SNE (exact)

struct TsneOptions {
  double perplexity = 30.0;
  int iterations = 1000;
  double learning_rate = 200.0;
  double exaggeration = 12.0;
  int exaggeration_iterations = 250;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  int momentum_switch_iteration = 250;
  double init_sigma = 1e-4;
  /// Record the KL divergence after every iteration (costs one log per pair).
  bool track_objective = false;
};

struct TsneResult {
  Eigen::MatrixXd coords;
  /// Perplexity reached by each point's conditional distribution.
  std::vector<double> row_perplexity;
  /// KL(P || Q) per iteration, empty unless track_objective was set. Entries
  /// during early exaggeration are measured against the un-exaggerated P.
  std::vector<double> kl_history;
};

/// Row-conditional Gaussian affinities with per-point precision found by
/// bisection so each row's perplexity matches `perplexity` to 1e-5.
/// Returns the n x n row-stochastic matrix (row-major) and fills `achieved`.
std::vector<double> conditional_affinities(const DistanceMatrix& d, double perplexity,
                                           std::vector<double>* achieved = nullptr);

/// Throws ArgumentError unless 1 <= perplexity <= (n-1)/3.
TsneResult tsne_embed(const Eigen::MatrixXd& features, const TsneOptions& opts, std::uint64_t seed);
TsneResult tsne_embed(const DistanceMatrix& d, const TsneOptions& opts, std::uint64_t seed);

Projection tsne(const Dataset& dataset, double perplexity, std::uint64_t seed, int iterations = 1000);

// ---------------------------------------------------------------------------
// UMAP (reduced: exact kNN, fixed curve, PCA init)

struct UmapOptions {
  int n_neighbors = 15;
  int epochs = 500;
  double a = 1.577;
  double b = 0.8951;
  int negative_sample_rate = 5;
  double initial_alpha = 1.0;
};

/// Symmetric fuzzy membership graph as an edge list; every pair appears in
/// both directions with the same weight.
struct FuzzyGraph {
  std::vector<int> head;
  std::vector<int> tail;
  std::vector<double> weight;
  /// Per-point smoothing parameters.
  std::vector<double> rho;
  std::vector<double> sigma;
};

FuzzyGraph fuzzy_simplicial_set(const DistanceMatrix& d, int n_neighbors);

/// Top-two principal component scores, each axis scaled to unit variance.
Eigen::MatrixXd pca_init(const Eigen::MatrixXd& features);

/// Throws ArgumentError unless 2 <= n_neighbors <= n-1.
Eigen::MatrixXd umap_embed(const Eigen::MatrixXd& features, const UmapOptions& opts, std::uint64_t seed);
Eigen::MatrixXd umap_embed(const Eigen::MatrixXd& features, const DistanceMatrix& d, const UmapOptions& opts,
                           std::uint64_t seed);

Projection umap(const Dataset& dataset, int n_neighbors, std::uint64_t seed, int epochs = 500);

/// round(fraction * n) clamped to [2, n-1].
int neighbors_from_fraction(double fraction, Eigen::Index n);

// ---------------------------------------------------------------------------
// LAMP

/// Classical (Torgerson) MDS: top `dims` eigenpairs of the double-centred
/// squared-distance matrix. Axis signs are fixed so each column's largest
/// magnitude entry is positive.
Eigen::MatrixXd classical_mds(const DistanceMatrix& d, int dims = 2);

struct LampTransform {
  Eigen::RowVectorXd x_center;
  Eigen::RowVector2d y_center;
  /// d x 2 with orthonormal columns.
  Eigen::MatrixXd linear;
};

/// Weighted orthogonal Procrustes map for one point given control points,
/// their embedding and Gaussian bandwidth h.
LampTransform lamp_point_transform(const Eigen::RowVectorXd& x, const Eigen::MatrixXd& control_x,
                                   const Eigen::MatrixXd& control_y, double bandwidth);

struct LampResult {
  Eigen::MatrixXd coords;
  std::vector<std::size_t> control_indices;
  Eigen::MatrixXd control_coords;
  double bandwidth = 0.0;
};

/// Throws ArgumentError unless control_fraction is in (0, 1] and yields >= 3
/// control points.
LampResult lamp_embed(const Eigen::MatrixXd& features, double control_fraction, std::uint64_t seed);

/// round(fraction * n), at most n.
std::size_t control_count(double fraction, Eigen::Index n);

Projection lamp(const Dataset& dataset, double control_fraction, std::uint64_t seed);

}  // namespace projscope
