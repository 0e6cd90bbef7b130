#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "projscope/dataset.hpp"
#include "projscope/learning.hpp"
#include "projscope/metric_table.hpp"
#include "projscope/projection.hpp"

namespace projscope {

struct SweepConfig {
  std::vector<std::string> datasets{"iris", "wine", "digits", "breast_cancer"};
  std::vector<double> tsne_perplexities{5, 10, 15, 20, 25, 30, 35, 40, 45, 50};
  std::vector<double> umap_neighbor_fractions{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::vector<double> lamp_control_fractions{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::vector<std::uint64_t> seeds{42};
  int np_k = kDefaultNeighborhoodSize;
  std::string data_dir = "data";
  std::string label_column = "label";
  /// 0 keeps every row.
  std::size_t subsample = 0;
  int tsne_iterations = 1000;
  int umap_epochs = 500;
  /// 0 picks the hardware concurrency.
  int workers = 0;
};

SweepConfig sweep_config_from_json(const std::string& text);
std::string sweep_config_to_json(const SweepConfig& cfg);
SweepConfig load_sweep_config(const std::filesystem::path& path);

/// Load, subsample and standardize one dataset of the sweep. Relative
/// data_dir entries resolve against `base`.
Dataset prepare_dataset(const SweepConfig& cfg, const std::string& name,
                        const std::filesystem::path& base = {});

struct SweepCell {
  std::string dataset;
  Technique technique;
  int param_index = 0;
  double parameter = 0.0;
  std::uint64_t master_seed = 0;
  std::uint64_t seed = 0;
  std::string projection_id;
};

/// Every (dataset, technique, parameter, seed) cell in sweep order.
std::vector<SweepCell> enumerate_cells(const SweepConfig& cfg);

struct CellFailure {
  std::string projection_id;
  std::string message;
};

struct SweepResult {
  std::vector<Projection> projections;
  std::vector<CellFailure> failures;
};

/// Runs every cell, writing `sweep.json`, `projections/<id>.{csv,json}` and
/// `failures.json` into out_dir. A failing cell is recorded and skipped.
SweepResult run_sweep(const SweepConfig& cfg, const std::filesystem::path& out_dir,
                      const std::filesystem::path& base = {});

struct RowError {
  std::string projection_id;
  std::string message;
};

struct Evaluation {
  MetricTable table;
  std::vector<RowError> errors;
};

/// One metric row per projection, sorted by (dataset, technique, parameter).
Evaluation evaluate_all(const std::vector<Projection>& projections,
                        const std::map<std::string, Dataset>& datasets, int np_k);

/// Projection ids stored under `<run>/projections`, sorted.
std::vector<std::string> list_projection_ids(const std::filesystem::path& run_dir);
std::vector<Projection> load_run_projections(const std::filesystem::path& run_dir);
std::map<std::string, Dataset> load_run_datasets(const std::filesystem::path& run_dir);

inline constexpr const char* kMetricTableFile = "metrics.csv";
inline constexpr const char* kMetricJsonFile = "metrics.jsonl";

/// Evaluates a stored run and writes metrics.csv and metrics.jsonl into it.
Evaluation evaluate_run(const std::filesystem::path& run_dir, int np_k);

struct SelectionRow {
  std::string dataset_id;
  Technique technique = Technique::imported;
  std::string projection_id;
  double parameter = 0.0;
  int n_neighbors = 0;
  std::uint64_t seed = 0;
  double q_unit = 0.0;
  double q_optimized = 0.0;
  double scale = 1.0;
  bool at_boundary = false;
};

struct SelectionReport {
  std::string user_id;
  bool scale_optimized = false;
  std::vector<SelectionRow> rows;
};

struct SelectOptions {
  bool scale_opt = true;
  double tolerance = 1e-6;
};

/// Per (dataset, technique): the row maximising the predicted rating, after
/// optional scale optimisation. Ties go to the smaller parameter, then the
/// smaller seed.
SelectionReport select_best(const MetricTable& table, const RegressionModel& model,
                            const SelectOptions& opts = {});

std::string selection_to_json(const SelectionReport& report);

/// Writes report.md, metrics.csv, model_<user>.json and mae_hist_<user>.csv.
void emit_report(const std::vector<SelectionReport>& selections, const MetricTable& table,
                 const std::vector<RegressionModel>& models, const std::filesystem::path& out_dir);

}  // namespace projscope
