#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace projscope {

/// Labeled n x d feature matrix. Labels are dense class ids 0..c-1.
struct Dataset {
  std::string id;
  std::string name;
  Eigen::MatrixXd features;
  std::vector<int> labels;
  std::vector<std::string> feature_names;
  std::string source;

  Eigen::Index size() const { return features.rows(); }
  Eigen::Index dims() const { return features.cols(); }
  int num_classes() const;
};

/// Throws DataError unless n >= 3, d >= 1, all values finite, labels sized n
/// and at least two distinct classes.
void validate(const Dataset& ds);

/// Load a CSV with a header row. Every column except `label_column` must be
/// numeric. Labels are encoded densely in order of first appearance.
Dataset load_dataset(const std::filesystem::path& path, const std::string& label_column = "label");

/// Names of the datasets shipped under data/.
const std::vector<std::string>& builtin_dataset_names();

/// Load `<data_dir>/<name>.csv`.
Dataset load_builtin(const std::string& name, const std::filesystem::path& data_dir);

/// Z-score every column with the population standard deviation. Constant
/// columns become 0.
Dataset standardize(const Dataset& ds);

/// Deterministic subsample of at most `max_rows` rows (original order kept).
/// Returns the input unchanged when max_rows == 0 or max_rows >= n.
Dataset subsample(const Dataset& ds, std::size_t max_rows, std::uint64_t seed);

}  // namespace projscope
