#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "projscope/dataset.hpp"
#include "projscope/distance.hpp"

namespace projscope {

enum class Technique { tsne, umap, lamp, imported };

std::string to_string(Technique t);
Technique parse_technique(const std::string& s);

/// Only the fields that belong to the technique are set.
struct ProjectionParams {
  std::optional<double> perplexity;
  /// Sweep grid value when the run used a smaller, admissible perplexity.
  std::optional<double> requested_perplexity;
  std::optional<int> n_neighbors;
  std::optional<double> neighbor_fraction;
  std::optional<double> control_fraction;
  std::optional<int> iterations;
  std::optional<double> learning_rate;

  friend bool operator==(const ProjectionParams&, const ProjectionParams&) = default;
};

/// The sweep parameter of a projection: perplexity for t-SNE, the neighbour
/// fraction for UMAP, the control fraction for LAMP, 0 otherwise.
double primary_parameter(Technique t, const ProjectionParams& p);

struct Projection {
  std::string id;
  std::string dataset_id;
  Technique technique = Technique::imported;
  ProjectionParams params;
  Eigen::MatrixXd coords;
  std::uint64_t seed = 0;
  double scale = 1.0;
};

/// Throws DataError if coords are not n x 2, contain non-finite values, or
/// scale <= 0.
void validate(const Projection& p, Eigen::Index expected_rows);

/// Rescale `coords` in place (after centring) so that the sum of squared
/// pairwise 2-D distances equals that of `d_high`. Returns the factor applied.
double match_distance_energy(Eigen::MatrixXd& coords, const DistanceMatrix& d_high);

/// Writes `<dir>/<id>.csv` (header `x,y`) and `<dir>/<id>.json` sidecar.
void write_projection(const Projection& p, const std::filesystem::path& dir);

/// Reads the pair written by write_projection().
Projection read_projection(const std::filesystem::path& dir, const std::string& id);

/// Import an externally computed embedding: a CSV with two numeric columns and
/// an optional header. The row count must equal the dataset's n.
Projection import_projection(const std::filesystem::path& path, const Dataset& dataset);

}  // namespace projscope
