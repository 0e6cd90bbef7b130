#include "projscope/projection.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "projscope/error.hpp"
#include "projscope/serialization.hpp"

namespace projscope {

using nlohmann::json;

std::string to_string(Technique t) {
  switch (t) {
    case Technique::tsne: return "tsne";
    case Technique::umap: return "umap";
    case Technique::lamp: return "lamp";
    case Technique::imported: return "imported";
  }
  return "imported";
}

Technique parse_technique(const std::string& s) {
  if (s == "tsne") return Technique::tsne;
  if (s == "umap") return Technique::umap;
  if (s == "lamp") return Technique::lamp;
  if (s == "imported") return Technique::imported;
  throw DataError("unknown technique '" + s + "'");
}

double primary_parameter(Technique t, const ProjectionParams& p) {
  switch (t) {
    case Technique::tsne: return p.requested_perplexity.value_or(p.perplexity.value_or(0.0));
    case Technique::umap: return p.neighbor_fraction.value_or(static_cast<double>(p.n_neighbors.value_or(0)));
    case Technique::lamp: return p.control_fraction.value_or(0.0);
    case Technique::imported: return 0.0;
  }
  return 0.0;
}

void validate(const Projection& p, Eigen::Index expected_rows) {
  if (p.coords.rows() != expected_rows || p.coords.cols() != 2) {
    throw DataError("projection '" + p.id + "' has " + std::to_string(p.coords.rows()) + "x" +
                    std::to_string(p.coords.cols()) + " coordinates, expected " + std::to_string(expected_rows) +
                    "x2");
  }
  if (!p.coords.allFinite()) throw DataError("projection '" + p.id + "' has non-finite coordinates");
  if (!(p.scale > 0.0) || !std::isfinite(p.scale)) throw DataError("projection '" + p.id + "' has non-positive scale");
}

double match_distance_energy(Eigen::MatrixXd& coords, const DistanceMatrix& d_high) {
  coords.rowwise() -= coords.colwise().mean();
  // sum_{i<j} |y_i - y_j|^2 = n * sum_i |y_i - mean|^2 for centred rows.
  const double low = static_cast<double>(coords.rows()) * coords.squaredNorm();
  const double high = d_high.sum_squares();
  if (low <= 0.0 || high <= 0.0) return 1.0;
  const double factor = std::sqrt(high / low);
  coords *= factor;
  return factor;
}

namespace {

json params_to_json(const ProjectionParams& p) {
  json j = json::object();
  if (p.perplexity) j["perplexity"] = *p.perplexity;
  if (p.requested_perplexity) j["requested_perplexity"] = *p.requested_perplexity;
  if (p.n_neighbors) j["n_neighbors"] = *p.n_neighbors;
  if (p.neighbor_fraction) j["neighbor_fraction"] = *p.neighbor_fraction;
  if (p.control_fraction) j["control_fraction"] = *p.control_fraction;
  if (p.iterations) j["iterations"] = *p.iterations;
  if (p.learning_rate) j["learning_rate"] = *p.learning_rate;
  return j;
}

ProjectionParams params_from_json(const json& j) {
  ProjectionParams p;
  if (j.contains("perplexity")) p.perplexity = j.at("perplexity").get<double>();
  if (j.contains("requested_perplexity")) p.requested_perplexity = j.at("requested_perplexity").get<double>();
  if (j.contains("n_neighbors")) p.n_neighbors = j.at("n_neighbors").get<int>();
  if (j.contains("neighbor_fraction")) p.neighbor_fraction = j.at("neighbor_fraction").get<double>();
  if (j.contains("control_fraction")) p.control_fraction = j.at("control_fraction").get<double>();
  if (j.contains("iterations")) p.iterations = j.at("iterations").get<int>();
  if (j.contains("learning_rate")) p.learning_rate = j.at("learning_rate").get<double>();
  return p;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool parse_cell(const std::string& raw, double& out) {
  std::string s = raw;
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return false;
  const char* first = s.data() + b;
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

Eigen::MatrixXd read_xy_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open projection file: " + path.string());
  std::vector<double> xs;
  std::vector<double> ys;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
      throw DataError(path.string() + ": line " + std::to_string(line_no) + " must have exactly two columns");
    double x = 0.0;
    double y = 0.0;
    const bool okx = parse_cell(line.substr(0, comma), x);
    const bool oky = parse_cell(line.substr(comma + 1), y);
    if (!okx || !oky) {
      if (line_no == 1 && xs.empty()) continue;  // header
      throw DataError(path.string() + ": non-numeric cell at line " + std::to_string(line_no) + ", column " +
                      (okx ? "2" : "1"));
    }
    xs.push_back(x);
    ys.push_back(y);
  }
  Eigen::MatrixXd coords(static_cast<Eigen::Index>(xs.size()), 2);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    coords(static_cast<Eigen::Index>(i), 0) = xs[i];
    coords(static_cast<Eigen::Index>(i), 1) = ys[i];
  }
  return coords;
}

}  // namespace

void write_projection(const Projection& p, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::string csv = "x,y\n";
  for (Eigen::Index i = 0; i < p.coords.rows(); ++i)
    csv += format_double(p.coords(i, 0)) + "," + format_double(p.coords(i, 1)) + "\n";
  write_text_file(dir / (p.id + ".csv"), csv);

  json meta = {{"id", p.id},
               {"dataset_id", p.dataset_id},
               {"technique", to_string(p.technique)},
               {"params", params_to_json(p.params)},
               {"seed", p.seed},
               {"scale", p.scale}};
  write_text_file(dir / (p.id + ".json"), meta.dump(2) + "\n");
}

Projection read_projection(const std::filesystem::path& dir, const std::string& id) {
  json meta;
  try {
    meta = json::parse(read_text_file(dir / (id + ".json")));
  } catch (const json::exception& e) {
    throw DataError("bad projection sidecar for '" + id + "': " + e.what());
  }
  Projection p;
  p.id = meta.at("id").get<std::string>();
  p.dataset_id = meta.at("dataset_id").get<std::string>();
  p.technique = parse_technique(meta.at("technique").get<std::string>());
  p.params = params_from_json(meta.value("params", json::object()));
  p.seed = meta.at("seed").get<std::uint64_t>();
  p.scale = meta.value("scale", 1.0);
  p.coords = read_xy_csv(dir / (id + ".csv"));
  return p;
}

Projection import_projection(const std::filesystem::path& path, const Dataset& dataset) {
  Projection p;
  p.id = path.stem().string();
  p.dataset_id = dataset.id;
  p.technique = Technique::imported;
  p.coords = read_xy_csv(path);
  if (p.coords.rows() != dataset.size()) {
    throw DataError(path.string() + ": " + std::to_string(p.coords.rows()) + " rows, dataset '" + dataset.id +
                    "' has " + std::to_string(dataset.size()));
  }
  validate(p, dataset.size());
  return p;
}

}  // namespace projscope
