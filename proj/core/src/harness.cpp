#include "projscope/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <optional>
#include <thread>

#include <json.hpp>

#include "projscope/error.hpp"
#include "projscope/projectors.hpp"
#include "projscope/rng.hpp"
#include "projscope/scaleopt.hpp"
#include "projscope/serialization.hpp"

namespace projscope {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string num_tag(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_absolute() || base.empty()) return path;
  return base / path;
}

template <typename T>
void read_list(const json& j, const char* key, std::vector<T>& out) {
  if (j.contains(key)) out = j.at(key).get<std::vector<T>>();
}

}  // namespace

SweepConfig sweep_config_from_json(const std::string& text) {
  SweepConfig cfg;
  try {
    const json j = json::parse(text);
    read_list(j, "datasets", cfg.datasets);
    read_list(j, "tsne_perplexities", cfg.tsne_perplexities);
    read_list(j, "umap_neighbor_fractions", cfg.umap_neighbor_fractions);
    read_list(j, "lamp_control_fractions", cfg.lamp_control_fractions);
    read_list(j, "seeds", cfg.seeds);
    cfg.np_k = j.value("np_k", cfg.np_k);
    cfg.data_dir = j.value("data_dir", cfg.data_dir);
    cfg.label_column = j.value("label_column", cfg.label_column);
    cfg.subsample = j.value("subsample", cfg.subsample);
    cfg.tsne_iterations = j.value("tsne_iterations", cfg.tsne_iterations);
    cfg.umap_epochs = j.value("umap_epochs", cfg.umap_epochs);
    cfg.workers = j.value("workers", cfg.workers);
  } catch (const json::exception& e) {
    throw DataError(std::string("bad sweep config: ") + e.what());
  }
  if (cfg.seeds.empty()) throw DataError("sweep config needs at least one seed");
  if (cfg.np_k < 1) throw DataError("sweep config np_k must be positive");
  return cfg;
}

std::string sweep_config_to_json(const SweepConfig& cfg) {
  ordered_json j;
  j["datasets"] = cfg.datasets;
  j["tsne_perplexities"] = cfg.tsne_perplexities;
  j["umap_neighbor_fractions"] = cfg.umap_neighbor_fractions;
  j["lamp_control_fractions"] = cfg.lamp_control_fractions;
  j["seeds"] = cfg.seeds;
  j["np_k"] = cfg.np_k;
  j["data_dir"] = cfg.data_dir;
  j["label_column"] = cfg.label_column;
  j["subsample"] = cfg.subsample;
  j["tsne_iterations"] = cfg.tsne_iterations;
  j["umap_epochs"] = cfg.umap_epochs;
  j["workers"] = cfg.workers;
  return j.dump(2) + "\n";
}

SweepConfig load_sweep_config(const std::filesystem::path& path) {
  return sweep_config_from_json(read_text_file(path));
}

Dataset prepare_dataset(const SweepConfig& cfg, const std::string& name, const std::filesystem::path& base) {
  Dataset raw = load_dataset(resolve(base, cfg.data_dir) / (name + ".csv"), cfg.label_column);
  return standardize(subsample(raw, cfg.subsample, cfg.seeds.front()));
}

std::vector<SweepCell> enumerate_cells(const SweepConfig& cfg) {
  std::vector<SweepCell> cells;
  const std::pair<Technique, const std::vector<double>*> grids[] = {
      {Technique::tsne, &cfg.tsne_perplexities},
      {Technique::umap, &cfg.umap_neighbor_fractions},
      {Technique::lamp, &cfg.lamp_control_fractions}};
  for (const auto& ds : cfg.datasets) {
    for (const auto& [tech, grid] : grids) {
      for (std::size_t i = 0; i < grid->size(); ++i) {
        for (std::uint64_t master : cfg.seeds) {
          SweepCell c;
          c.dataset = ds;
          c.technique = tech;
          c.param_index = static_cast<int>(i);
          c.parameter = (*grid)[i];
          c.master_seed = master;
          c.seed = derive_seed(master, {hash_string(ds), static_cast<std::uint64_t>(tech), i});
          const char* prefix = tech == Technique::tsne ? "p" : "f";
          c.projection_id = ds + "-" + to_string(tech) + "-" + prefix + num_tag(c.parameter) + "-s" +
                            std::to_string(master);
          cells.push_back(std::move(c));
        }
      }
    }
  }
  return cells;
}

namespace {

Projection run_cell(const SweepCell& cell, const Dataset& ds, const SweepConfig& cfg) {
  Projection p;
  switch (cell.technique) {
    case Technique::tsne: {
      const double limit = (static_cast<double>(ds.size()) - 1.0) / 3.0;
      const double perplexity = std::min(cell.parameter, limit);
      p = tsne(ds, perplexity, cell.seed, cfg.tsne_iterations);
      if (perplexity != cell.parameter) p.params.requested_perplexity = cell.parameter;
      break;
    }
    case Technique::umap:
      p = umap(ds, neighbors_from_fraction(cell.parameter, ds.size()), cell.seed, cfg.umap_epochs);
      p.params.neighbor_fraction = cell.parameter;
      break;
    case Technique::lamp:
      p = lamp(ds, cell.parameter, cell.seed);
      break;
    case Technique::imported:
      throw ArgumentError("imported projections are not generated by sweeps");
  }
  p.id = cell.projection_id;
  validate(p, ds.size());
  return p;
}

}  // namespace

SweepResult run_sweep(const SweepConfig& cfg, const std::filesystem::path& out_dir,
                      const std::filesystem::path& base) {
  std::map<std::string, Dataset> datasets;
  for (const auto& name : cfg.datasets) datasets.emplace(name, prepare_dataset(cfg, name, base));

  SweepConfig stored = cfg;
  stored.data_dir = std::filesystem::absolute(resolve(base, cfg.data_dir)).lexically_normal().string();
  const std::filesystem::path proj_dir = out_dir / "projections";
  std::filesystem::remove_all(proj_dir);
  std::filesystem::create_directories(proj_dir);
  write_text_file(out_dir / "sweep.json", sweep_config_to_json(stored));

  const std::vector<SweepCell> cells = enumerate_cells(cfg);
  std::vector<std::optional<Projection>> done(cells.size());
  std::vector<std::optional<std::string>> errors(cells.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        Projection p = run_cell(cells[i], datasets.at(cells[i].dataset), cfg);
        write_projection(p, proj_dir);
        done[i] = std::move(p);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  unsigned workers = cfg.workers > 0 ? static_cast<unsigned>(cfg.workers) : std::thread::hardware_concurrency();
  workers = std::clamp<unsigned>(workers, 1, static_cast<unsigned>(std::max<std::size_t>(cells.size(), 1)));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  SweepResult result;
  ordered_json failures = ordered_json::array();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (done[i]) result.projections.push_back(std::move(*done[i]));
    if (errors[i]) {
      result.failures.push_back({cells[i].projection_id, *errors[i]});
      failures.push_back({{"projection_id", cells[i].projection_id}, {"message", *errors[i]}});
    }
  }
  write_text_file(out_dir / "failures.json", failures.dump(2) + "\n");
  return result;
}

Evaluation evaluate_all(const std::vector<Projection>& projections, const std::map<std::string, Dataset>& datasets,
                        int np_k) {
  struct HighSpace {
    DistanceMatrix d;
    std::vector<std::vector<int>> knn;
  };
  std::map<std::string, HighSpace> high;
  Evaluation ev;
  for (const auto& p : projections) {
    try {
      const auto ds = datasets.find(p.dataset_id);
      if (ds == datasets.end()) throw DataError("dataset '" + p.dataset_id + "' is not available");
      validate(p, ds->second.size());
      auto it = high.find(p.dataset_id);
      if (it == high.end()) {
        HighSpace h;
        h.d = pairwise_distances(ds->second.features);
        h.knn = nearest_neighbors(h.d, np_k);
        it = high.emplace(p.dataset_id, std::move(h)).first;
      }
      const DistanceMatrix d_low = pairwise_distances(p.coords);
      MetricRow row;
      row.projection_id = p.id;
      row.dataset_id = p.dataset_id;
      row.technique = p.technique;
      row.parameter = primary_parameter(p.technique, p.params);
      row.n_neighbors = p.params.n_neighbors.value_or(0);
      row.seed = p.seed;
      row.metric.sc = silhouette(d_low, ds->second.labels).overall;
      row.metric.stress = stress(it->second.d, d_low);
      row.metric.np = neighborhood_preservation(it->second.knn, d_low, np_k);
      row.metric.np_k = np_k;
      row.profile = StressProfile::from(it->second.d, d_low);
      ev.table.push_back(std::move(row));
    } catch (const std::exception& e) {
      ev.errors.push_back({p.id, e.what()});
    }
  }
  sort_table(ev.table);
  return ev;
}

std::vector<std::string> list_projection_ids(const std::filesystem::path& run_dir) {
  const auto dir = run_dir / "projections";
  if (!std::filesystem::is_directory(dir)) throw DataError("no projections directory in " + run_dir.string());
  std::vector<std::string> ids;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.path().extension() == ".json") ids.push_back(entry.path().stem().string());
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<Projection> load_run_projections(const std::filesystem::path& run_dir) {
  std::vector<Projection> out;
  for (const auto& id : list_projection_ids(run_dir)) out.push_back(read_projection(run_dir / "projections", id));
  return out;
}

std::map<std::string, Dataset> load_run_datasets(const std::filesystem::path& run_dir) {
  const SweepConfig cfg = load_sweep_config(run_dir / "sweep.json");
  std::map<std::string, Dataset> out;
  for (const auto& name : cfg.datasets) out.emplace(name, prepare_dataset(cfg, name, run_dir));
  return out;
}

Evaluation evaluate_run(const std::filesystem::path& run_dir, int np_k) {
  const auto datasets = load_run_datasets(run_dir);
  Evaluation ev = evaluate_all(load_run_projections(run_dir), datasets, np_k);
  write_metric_table(ev.table, run_dir / kMetricTableFile);
  std::string jsonl;
  for (const auto& row : ev.table) jsonl += metric_json(row) + "\n";
  write_text_file(run_dir / kMetricJsonFile, jsonl);
  return ev;
}

SelectionReport select_best(const MetricTable& input, const RegressionModel& model, const SelectOptions& opts) {
  MetricTable table = input;
  sort_table(table);
  SelectionReport report;
  report.user_id = model.user_id;
  report.scale_optimized = opts.scale_opt;

  std::map<std::pair<std::string, Technique>, std::size_t> slot;
  std::vector<double> best_value;
  for (const auto& row : table) {
    SelectionRow cand;
    cand.dataset_id = row.dataset_id;
    cand.technique = row.technique;
    cand.projection_id = row.projection_id;
    cand.parameter = row.parameter;
    cand.n_neighbors = row.n_neighbors;
    cand.seed = row.seed;
    cand.q_unit = predict_rating(model, row.metric);
    cand.q_optimized = cand.q_unit;
    if (opts.scale_opt && row.profile.ll > 0.0 && row.profile.hl > 0.0 && row.profile.hh > 0.0) {
      const ScaleSearch s =
          optimize_scale(row.profile, row.metric, model.weights, default_search(row.profile, opts.tolerance));
      cand.q_optimized = s.result_q;
      cand.scale = s.result_s;
      cand.at_boundary = s.at_boundary;
    }
    const double value = opts.scale_opt ? cand.q_optimized : cand.q_unit;
    const auto key = std::make_pair(row.dataset_id, row.technique);
    auto it = slot.find(key);
    if (it == slot.end()) {
      slot.emplace(key, report.rows.size());
      report.rows.push_back(std::move(cand));
      best_value.push_back(value);
    } else if (value > best_value[it->second]) {
      report.rows[it->second] = std::move(cand);
      best_value[it->second] = value;
    }
  }
  return report;
}

std::string selection_to_json(const SelectionReport& report) {
  ordered_json j;
  j["user_id"] = report.user_id;
  j["scale_optimized"] = report.scale_optimized;
  j["rows"] = ordered_json::array();
  for (const auto& r : report.rows) {
    ordered_json row;
    row["dataset_id"] = r.dataset_id;
    row["technique"] = to_string(r.technique);
    row["projection_id"] = r.projection_id;
    row["parameter"] = r.parameter;
    row["n_neighbors"] = r.n_neighbors;
    row["seed"] = r.seed;
    row["q_unit"] = r.q_unit;
    row["q_optimized"] = r.q_optimized;
    row["scale"] = r.scale;
    row["at_boundary"] = r.at_boundary;
    j["rows"].push_back(row);
  }
  return j.dump(2) + "\n";
}

}  // namespace projscope
