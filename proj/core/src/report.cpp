#include <cctype>
#include <cstdio>
#include <string>

#include "projscope/error.hpp"
#include "projscope/harness.hpp"
#include "projscope/serialization.hpp"

namespace projscope {
namespace {

std::string f4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string f3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string parameter_cell(const SelectionRow& r) {
  switch (r.technique) {
    case Technique::tsne: return "perplexity " + std::to_string(static_cast<int>(r.parameter));
    case Technique::umap:
      return std::to_string(static_cast<int>(r.parameter * 100.0 + 0.5)) + "% (" + std::to_string(r.n_neighbors) +
             " neighbors)";
    case Technique::lamp: return std::to_string(static_cast<int>(r.parameter * 100.0 + 0.5)) + "% control points";
    case Technique::imported: return "-";
  }
  return "-";
}

std::string safe_name(const std::string& user) {
  std::string out;
  for (char c : user) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  return out.empty() ? "user" : out;
}

}  // namespace

void emit_report(const std::vector<SelectionReport>& selections, const MetricTable& table,
                 const std::vector<RegressionModel>& models, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir))
    throw DataError("cannot create report directory " + out_dir.string());

  MetricTable sorted = table;
  sort_table(sorted);
  write_metric_table(sorted, out_dir / "metrics.csv");

  std::string md = "# Projection selection report\n\n";
  md += "Projections evaluated: " + std::to_string(sorted.size()) + "\n\n";

  if (models.empty()) {
    md += "No ratings were provided, so no user models were learned. The model, selection and error-histogram "
          "sections are omitted.\n";
    write_text_file(out_dir / "report.md", md);
    return;
  }

  md += "## Learned weights\n\n";
  md += "| User | Bias | SC | Stress | NP | Model | lambda | CV RMSE | Test RMSE | Test MAE |\n";
  md += "|---|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& m : models) {
    md += "| " + m.user_id + " | " + f3(m.weights.w1) + " | " + f3(m.weights.w2) + " | " + f3(m.weights.w3) + " | " +
          f3(m.weights.w4) + " | " + to_string(m.kind) + " | " + f4(m.lambda) + " | " + f4(m.cv_rmse) + " | " +
          f4(m.test_rmse) + " | " + f4(m.test_mae) + " |\n";
    write_model(m, out_dir / ("model_" + safe_name(m.user_id) + ".json"));

    std::string hist = "bin_start,bin_end,count\n";
    if (!m.test_abs_errors.empty()) {
      const Histogram h = error_histogram(m.test_abs_errors);
      for (std::size_t b = 0; b < h.counts.size(); ++b)
        hist += f4(h.edges[b]) + "," + f4(h.edges[b + 1]) + "," + std::to_string(h.counts[b]) + "\n";
    }
    write_text_file(out_dir / ("mae_hist_" + safe_name(m.user_id) + ".csv"), hist);
  }
  md += "\n";

  for (const auto& sel : selections) {
    md += "## Best projections for " + sel.user_id + "\n\n";
    md += sel.scale_optimized ? "Scale optimisation: on.\n\n" : "Scale optimisation: off.\n\n";
    md += "| Dataset | Technique | Projection | Parameter | Q (s=1) | Q (optimised) | s | Boundary |\n";
    md += "|---|---|---|---|---|---|---|---|\n";
    for (const auto& r : sel.rows) {
      md += "| " + r.dataset_id + " | " + to_string(r.technique) + " | " + r.projection_id + " | " + parameter_cell(r) +
            " | " + f4(r.q_unit) + " | " + f4(r.q_optimized) + " | " + f4(r.scale) + " | " +
            (r.at_boundary ? "yes" : "no") + " |\n";
    }
    md += "\n";
    write_text_file(out_dir / ("selection_" + safe_name(sel.user_id) + ".json"), selection_to_json(sel));
  }
  write_text_file(out_dir / "report.md", md);
}

}  // namespace projscope
