#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "projscope/metrics.hpp"
#include "projscope/projection.hpp"
#include "projscope/scaleopt.hpp"

namespace projscope {

/// One evaluated projection. `profile` keeps the pair sums needed to
/// re-evaluate stress at any scale without reloading coordinates.
struct MetricRow {
  std::string projection_id;
  std::string dataset_id;
  Technique technique = Technique::imported;
  double parameter = 0.0;
  int n_neighbors = 0;
  std::uint64_t seed = 0;
  MetricVector metric;
  StressProfile profile;
};

using MetricTable = std::vector<MetricRow>;

/// Orders rows by (dataset, technique, parameter, seed, id).
void sort_table(MetricTable& table);

/// CSV with full round-trip precision.
void write_metric_table(const MetricTable& table, const std::filesystem::path& path);
MetricTable read_metric_table(const std::filesystem::path& path);

/// `{"projection_id":..,"sc":..,"stress":..,"np":..,"np_k":..}`
std::string metric_json(const MetricRow& row);

}  // namespace projscope
