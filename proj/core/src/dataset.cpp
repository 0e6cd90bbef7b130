#include "projscope/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "projscope/error.hpp"
#include "projscope/rng.hpp"

namespace projscope {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cell));
      cell.clear();
    } else {
      cell += c;
    }
  }
  out.push_back(std::move(cell));
  return out;
}

std::string trim(std::string s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

int Dataset::num_classes() const {
  return static_cast<int>(std::set<int>(labels.begin(), labels.end()).size());
}

void validate(const Dataset& ds) {
  if (ds.size() < 3) throw DataError("dataset '" + ds.id + "' needs at least 3 rows");
  if (ds.dims() < 1) throw DataError("dataset '" + ds.id + "' needs at least 1 feature");
  if (static_cast<Eigen::Index>(ds.labels.size()) != ds.size())
    throw DataError("dataset '" + ds.id + "': label count does not match row count");
  if (!ds.features.allFinite()) throw DataError("dataset '" + ds.id + "' contains non-finite values");
  if (ds.num_classes() < 2) throw DataError("dataset '" + ds.id + "' needs at least 2 classes");
}

Dataset load_dataset(const std::filesystem::path& path, const std::string& label_column) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file: " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": missing header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  std::vector<std::string> header = split_csv_line(line);
  for (auto& h : header) h = trim(h);

  int label_col = -1;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (header[c] == label_column) label_col = static_cast<int>(c);
  if (label_col < 0) throw DataError(path.string() + ": label column '" + label_column + "' not found");

  Dataset ds;
  ds.source = path.string();
  ds.id = path.stem().string();
  ds.name = ds.id;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (static_cast<int>(c) != label_col) ds.feature_names.push_back(header[c]);

  const std::size_t d = ds.feature_names.size();
  std::vector<double> values;
  std::map<std::string, int> label_ids;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw DataError(path.string() + ": row " + std::to_string(row) + " has " +
                      std::to_string(cells.size()) + " cells, expected " + std::to_string(header.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      std::string cell = trim(cells[c]);
      if (static_cast<int>(c) == label_col) {
        auto [it, inserted] = label_ids.emplace(cell, static_cast<int>(label_ids.size()));
        ds.labels.push_back(it->second);
        continue;
      }
      double v = 0.0;
      if (!parse_double(cell, v) || !std::isfinite(v)) {
        throw DataError(path.string() + ": non-numeric value '" + cell + "' at row " + std::to_string(row) +
                        ", column '" + header[c] + "'");
      }
      values.push_back(v);
    }
  }

  ds.features.resize(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(d));
  for (std::size_t r = 0; r < row; ++r)
    for (std::size_t c = 0; c < d; ++c)
      ds.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = values[r * d + c];

  if (ds.num_classes() < 2)
    throw DataError(path.string() + ": fewer than 2 classes in column '" + label_column + "'");
  validate(ds);
  return ds;
}

const std::vector<std::string>& builtin_dataset_names() {
  static const std::vector<std::string> names{"iris", "wine", "digits", "breast_cancer"};
  return names;
}

Dataset load_builtin(const std::string& name, const std::filesystem::path& data_dir) {
  return load_dataset(data_dir / (name + ".csv"));
}

Dataset standardize(const Dataset& ds) {
  Dataset out = ds;
  const double n = static_cast<double>(ds.size());
  for (Eigen::Index c = 0; c < ds.dims(); ++c) {
    auto col = out.features.col(c);
    const double mean = col.sum() / n;
    col.array() -= mean;
    const double sd = std::sqrt(col.squaredNorm() / n);
    if (sd > 0.0) col /= sd;
  }
  return out;
}

Dataset subsample(const Dataset& ds, std::size_t max_rows, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(ds.size());
  if (max_rows == 0 || max_rows >= n) return ds;
  Rng rng(derive_seed(seed, {hash_string(ds.id)}));
  auto picked = rng.sample_without_replacement(n, max_rows);
  std::sort(picked.begin(), picked.end());

  Dataset out = ds;
  out.features.resize(static_cast<Eigen::Index>(max_rows), ds.dims());
  out.labels.clear();
  for (std::size_t r = 0; r < picked.size(); ++r) {
    out.features.row(static_cast<Eigen::Index>(r)) = ds.features.row(static_cast<Eigen::Index>(picked[r]));
    out.labels.push_back(ds.labels[picked[r]]);
  }
  validate(out);
  return out;
}

}  // namespace projscope
