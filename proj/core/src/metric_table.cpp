#include "projscope/metric_table.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "projscope/error.hpp"
#include "projscope/serialization.hpp"

namespace projscope {
namespace {

constexpr const char* kHeader =
    "projection_id,dataset_id,technique,parameter,n_neighbors,seed,sc,stress,np,np_k,sum_hh,sum_hl,sum_ll";

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

void sort_table(MetricTable& table) {
  std::sort(table.begin(), table.end(), [](const MetricRow& a, const MetricRow& b) {
    return std::tie(a.dataset_id, a.technique, a.parameter, a.seed, a.projection_id) <
           std::tie(b.dataset_id, b.technique, b.parameter, b.seed, b.projection_id);
  });
}

void write_metric_table(const MetricTable& table, const std::filesystem::path& path) {
  std::string out = std::string(kHeader) + "\n";
  for (const auto& r : table) {
    out += r.projection_id + "," + r.dataset_id + "," + to_string(r.technique) + "," + fmt(r.parameter) + "," +
           std::to_string(r.n_neighbors) + "," + std::to_string(r.seed) + "," + fmt(r.metric.sc) + "," +
           fmt(r.metric.stress) + "," + fmt(r.metric.np) + "," + std::to_string(r.metric.np_k) + "," +
           fmt(r.profile.hh) + "," + fmt(r.profile.hl) + "," + fmt(r.profile.ll) + "\n";
  }
  write_text_file(path, out);
}

MetricTable read_metric_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("metric table not found: " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("projection_id,", 0) != 0)
    throw DataError(path.string() + ": missing metric table header");
  MetricTable table;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto c = split(line);
    if (c.size() != 13) throw DataError(path.string() + ": line " + std::to_string(line_no) + " has wrong arity");
    try {
      MetricRow r;
      r.projection_id = c[0];
      r.dataset_id = c[1];
      r.technique = parse_technique(c[2]);
      r.parameter = std::stod(c[3]);
      r.n_neighbors = std::stoi(c[4]);
      r.seed = std::stoull(c[5]);
      r.metric.sc = std::stod(c[6]);
      r.metric.stress = std::stod(c[7]);
      r.metric.np = std::stod(c[8]);
      r.metric.np_k = std::stoi(c[9]);
      r.profile.hh = std::stod(c[10]);
      r.profile.hl = std::stod(c[11]);
      r.profile.ll = std::stod(c[12]);
      table.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw DataError(path.string() + ": line " + std::to_string(line_no) + " has a malformed number");
    }
  }
  return table;
}

std::string metric_json(const MetricRow& row) {
  nlohmann::ordered_json j;
  j["projection_id"] = row.projection_id;
  j["sc"] = row.metric.sc;
  j["stress"] = row.metric.stress;
  j["np"] = row.metric.np;
  j["np_k"] = row.metric.np_k;
  return j.dump();
}

}  // namespace projscope
