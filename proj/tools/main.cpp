#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "projscope/error.hpp"
#include "projscope/harness.hpp"
#include "projscope/learning.hpp"
#include "projscope/metric_table.hpp"
#include "projscope/metrics.hpp"
#include "projscope/projection.hpp"
#include "projscope/rating_service.hpp"
#include "projscope/scaleopt.hpp"
#include "projscope/serialization.hpp"

namespace fs = std::filesystem;
using namespace projscope;

namespace {

constexpr int kUsageError = 1;
constexpr int kDataError = 2;

bool parse_switch(const std::string& v) {
  if (v == "on") return true;
  if (v == "off") return false;
  throw ArgumentError("--scale-opt expects on or off, got '" + v + "'");
}

Dataset dataset_for(const std::string& spec, const std::string& data_dir, const std::string& label_column) {
  if (spec.ends_with(".csv")) return standardize(load_dataset(spec, label_column));
  SweepConfig cfg;
  cfg.data_dir = data_dir;
  cfg.label_column = label_column;
  return prepare_dataset(cfg, spec);
}

MetricTable load_or_evaluate(const fs::path& run, int np_k) {
  const fs::path table_path = run / kMetricTableFile;
  if (fs::exists(table_path)) return read_metric_table(table_path);
  return evaluate_run(run, np_k).table;
}

std::string user_from_ratings_path(const fs::path& p) {
  std::string stem = p.stem().string();
  if (stem.starts_with("ratings_")) stem = stem.substr(8);
  return stem;
}

void write_scaled(const Projection& base, double s, const fs::path& dir) {
  Projection p = base;
  p.coords *= s;
  p.scale = base.scale * s;
  write_projection(p, dir);
}

RatingHttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"projscope: generate, score and select personalised 2-D projections"};
  app.require_subcommand(1);
  std::string label_column = "label";
  app.add_option("--label-column", label_column, "Label column of dataset CSVs");

  // generate
  auto* gen = app.add_subcommand("generate", "Run a projection sweep");
  std::string gen_config, gen_out, gen_scale = "off", gen_model;
  std::size_t gen_subsample = 0;
  int gen_workers = -1;
  gen->add_option("--config", gen_config, "Sweep config JSON");
  gen->add_option("--out", gen_out, "Run directory")->required();
  gen->add_option("--scale-opt", gen_scale, "on|off (needs --model when on)")->check(CLI::IsMember({"on", "off"}));
  gen->add_option("--model", gen_model, "Model JSON used for scale optimisation");
  gen->add_option("--subsample", gen_subsample, "Cap rows per dataset (0 keeps all)");
  gen->add_option("--workers", gen_workers, "Worker threads (0 = hardware)");

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Score projections");
  std::string ev_run, ev_projection, ev_dataset, ev_coords, ev_data_dir = "data";
  int ev_k = kDefaultNeighborhoodSize;
  ev->add_option("--run", ev_run, "Run directory");
  ev->add_option("--k", ev_k, "Neighbourhood size for NP");
  ev->add_option("--projection", ev_projection, "Score one stored projection of --run");
  ev->add_option("--dataset", ev_dataset, "Dataset name or CSV path (with --coords)");
  ev->add_option("--coords", ev_coords, "Projection CSV to score");
  ev->add_option("--data-dir", ev_data_dir, "Directory of bundled datasets");

  // serve
  auto* srv = app.add_subcommand("serve", "Run the rating service");
  std::string srv_run, srv_host = "127.0.0.1", srv_guidelines, srv_static;
  int srv_port = 8080;
  srv->add_option("--run", srv_run, "Run directory")->required();
  srv->add_option("--port", srv_port, "TCP port");
  srv->add_option("--host", srv_host, "Bind address");
  srv->add_option("--guidelines", srv_guidelines, "Guidelines text file");
  srv->add_option("--static", srv_static, "Directory of UI assets");

  // learn
  auto* lrn = app.add_subcommand("learn", "Fit a user's metric weights");
  std::string lrn_ratings, lrn_out, lrn_run, lrn_user;
  std::uint64_t lrn_seed = 42;
  int lrn_folds = 5;
  lrn->add_option("--ratings", lrn_ratings, "ratings_<user>.jsonl or a training-set JSON")->required();
  lrn->add_option("--out", lrn_out, "Model JSON")->required();
  lrn->add_option("--run", lrn_run, "Run directory (defaults to the log's run)");
  lrn->add_option("--user", lrn_user, "User id (defaults to the file name)");
  lrn->add_option("--seed", lrn_seed, "Split and fold seed");
  lrn->add_option("--folds", lrn_folds, "Maximum CV folds");

  // select
  auto* sel = app.add_subcommand("select", "Pick each user's best projections");
  std::string sel_run, sel_model, sel_scale = "on", sel_out;
  int sel_k = kDefaultNeighborhoodSize;
  sel->add_option("--run", sel_run, "Run directory")->required();
  sel->add_option("--model", sel_model, "Model JSON")->required();
  sel->add_option("--scale-opt", sel_scale, "on|off")->check(CLI::IsMember({"on", "off"}));
  sel->add_option("--out", sel_out, "Selection JSON (default <run>/selection_<user>.json)");
  sel->add_option("--k", sel_k, "NP neighbourhood size if the run is not evaluated yet");

  // report
  auto* rep = app.add_subcommand("report", "Write the markdown report and CSVs");
  std::string rep_run, rep_out, rep_scale = "on";
  std::vector<std::string> rep_models;
  int rep_k = kDefaultNeighborhoodSize;
  rep->add_option("--run", rep_run, "Run directory")->required();
  rep->add_option("--models", rep_models, "Model JSON files");
  rep->add_option("--out", rep_out, "Report directory")->required();
  rep->add_option("--scale-opt", rep_scale, "on|off")->check(CLI::IsMember({"on", "off"}));
  rep->add_option("--k", rep_k, "NP neighbourhood size if the run is not evaluated yet");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*gen) {
      SweepConfig cfg = gen_config.empty() ? SweepConfig{} : load_sweep_config(gen_config);
      const fs::path base = gen_config.empty() ? fs::current_path() : fs::path(gen_config).parent_path();
      cfg.label_column = label_column;
      if (gen_subsample) cfg.subsample = gen_subsample;
      if (gen_workers >= 0) cfg.workers = gen_workers;
      const bool scale = parse_switch(gen_scale);
      if (scale && gen_model.empty()) throw ArgumentError("--scale-opt on needs --model");
      const SweepResult result = run_sweep(cfg, gen_out, base);
      if (scale) {
        const RegressionModel model = read_model(gen_model);
        const auto datasets = load_run_datasets(gen_out);
        for (const Projection& p : result.projections) {
          const Dataset& ds = datasets.at(p.dataset_id);
          const ScaledProjection sp =
              optimal_scale(pairwise_distances(ds.features), p, ds.labels, model.weights, {}, cfg.np_k);
          write_projection(sp.projection, fs::path(gen_out) / "projections");
        }
      }
      std::cout << result.projections.size() << " projections written to " << gen_out << "\n";
      for (const auto& f : result.failures) std::cerr << "failed: " << f.projection_id << ": " << f.message << "\n";
      return result.failures.empty() ? 0 : kDataError;
    }

    if (*ev) {
      if (!ev_coords.empty()) {
        if (ev_dataset.empty()) throw ArgumentError("--coords needs --dataset");
        const Dataset ds = dataset_for(ev_dataset, ev_data_dir, label_column);
        const Projection p = import_projection(ev_coords, ds);
        const MetricVector m = evaluate_projection(pairwise_distances(ds.features), p.coords, ds.labels, ev_k);
        MetricRow row;
        row.projection_id = p.id;
        row.metric = m;
        std::cout << metric_json(row) << "\n";
        return 0;
      }
      if (ev_run.empty()) throw ArgumentError("evaluate needs --run or --dataset with --coords");
      if (!ev_projection.empty()) {
        const auto datasets = load_run_datasets(ev_run);
        const Projection p = read_projection(fs::path(ev_run) / "projections", ev_projection);
        const auto it = datasets.find(p.dataset_id);
        if (it == datasets.end()) throw DataError("dataset '" + p.dataset_id + "' not part of the run");
        MetricRow row;
        row.projection_id = p.id;
        row.metric =
            evaluate_projection(pairwise_distances(it->second.features), p.coords, it->second.labels, ev_k);
        std::cout << metric_json(row) << "\n";
        return 0;
      }
      const Evaluation e = evaluate_run(ev_run, ev_k);
      std::cout << e.table.size() << " rows written to " << (fs::path(ev_run) / kMetricTableFile).string() << "\n";
      for (const auto& err : e.errors) std::cerr << "error: " << err.projection_id << ": " << err.message << "\n";
      return e.errors.empty() ? 0 : kDataError;
    }

    if (*srv) {
      const std::string guidelines =
          srv_guidelines.empty() ? RatingService::default_guidelines() : read_text_file(srv_guidelines);
      RatingService service(srv_run, guidelines);
      std::optional<fs::path> assets;
      if (!srv_static.empty()) assets = srv_static;
      RatingHttpServer server(service, assets);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << "serving " << srv_run << " on http://" << srv_host << ":" << srv_port << std::endl;
      if (!server.listen(srv_host, srv_port)) throw DataError("cannot listen on port " + std::to_string(srv_port));
      g_server = nullptr;
      return 0;
    }

    if (*lrn) {
      const fs::path ratings(lrn_ratings);
      TrainingSet training;
      if (ratings.extension() == ".jsonl") {
        const std::string user = lrn_user.empty() ? user_from_ratings_path(ratings) : lrn_user;
        fs::path run = lrn_run;
        if (run.empty()) {
          run = fs::absolute(ratings).parent_path().parent_path();
          if (!fs::exists(run / kMetricTableFile)) throw ArgumentError("pass --run for ratings outside a run");
        }
        const fs::path expected = ratings_path(run, user);
        if (!fs::exists(expected) || !fs::equivalent(expected, ratings)) {
          fs::create_directories(expected.parent_path());
          fs::copy_file(ratings, expected, fs::copy_options::overwrite_existing);
        }
        training = export_training_set(user, run);
      } else {
        training = training_set_from_json(read_text_file(ratings));
        if (!lrn_user.empty()) training.user_id = lrn_user;
      }
      SelectionOptions opts;
      opts.folds = lrn_folds;
      const RegressionModel model = select_model(training, lrn_seed, opts);
      write_model(model, lrn_out);
      std::cout << model_to_json(model) << "\n";
      return 0;
    }

    if (*sel) {
      const RegressionModel model = read_model(sel_model);
      const MetricTable table = load_or_evaluate(sel_run, sel_k);
      SelectOptions opts;
      opts.scale_opt = parse_switch(sel_scale);
      const SelectionReport report = select_best(table, model, opts);
      const fs::path out =
          sel_out.empty() ? fs::path(sel_run) / ("selection_" + model.user_id + ".json") : fs::path(sel_out);
      write_text_file(out, selection_to_json(report));
      if (opts.scale_opt) {
        const fs::path dir = fs::path(sel_run) / ("selected_" + model.user_id);
        fs::remove_all(dir);
        fs::create_directories(dir);
        for (const auto& r : report.rows)
          write_scaled(read_projection(fs::path(sel_run) / "projections", r.projection_id), r.scale, dir);
      }
      std::cout << selection_to_json(report) << "\n";
      return 0;
    }

    if (*rep) {
      const MetricTable table = load_or_evaluate(rep_run, rep_k);
      SelectOptions opts;
      opts.scale_opt = parse_switch(rep_scale);
      std::vector<RegressionModel> models;
      std::vector<SelectionReport> selections;
      for (const auto& path : rep_models) {
        models.push_back(read_model(path));
        selections.push_back(select_best(table, models.back(), opts));
      }
      emit_report(selections, table, models, rep_out);
      std::cout << "report written to " << rep_out << "\n";
      return 0;
    }
  } catch (const ArgumentError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsageError;
}
