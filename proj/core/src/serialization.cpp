#include "projscope/serialization.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "projscope/error.hpp"

namespace projscope {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
    if (!out) throw DataError("write failed for " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string model_to_json(const RegressionModel& m) {
  ordered_json j;
  j["user_id"] = m.user_id;
  j["kind"] = to_string(m.kind);
  j["lambda"] = m.lambda;
  j["w1"] = m.weights.w1;
  j["w2"] = m.weights.w2;
  j["w3"] = m.weights.w3;
  j["w4"] = m.weights.w4;
  j["cv_rmse"] = m.cv_rmse;
  j["test_rmse"] = m.test_rmse;
  j["test_mae"] = m.test_mae;
  j["test_abs_errors"] = m.test_abs_errors;
  return j.dump(2) + "\n";
}

RegressionModel model_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    RegressionModel m;
    m.user_id = j.value("user_id", std::string{});
    m.kind = parse_model_kind(j.value("kind", std::string{"ols"}));
    m.lambda = j.value("lambda", 0.0);
    m.weights = {j.at("w1").get<double>(), j.at("w2").get<double>(), j.at("w3").get<double>(),
                 j.at("w4").get<double>()};
    m.cv_rmse = j.value("cv_rmse", 0.0);
    m.test_rmse = j.value("test_rmse", 0.0);
    m.test_mae = j.value("test_mae", 0.0);
    if (j.contains("test_abs_errors")) m.test_abs_errors = j.at("test_abs_errors").get<std::vector<double>>();
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("bad model JSON: ") + e.what());
  }
}

void write_model(const RegressionModel& m, const std::filesystem::path& path) {
  write_text_file(path, model_to_json(m));
}

RegressionModel read_model(const std::filesystem::path& path) { return model_from_json(read_text_file(path)); }

std::string training_set_to_json(const TrainingSet& t) {
  ordered_json j;
  j["user_id"] = t.user_id;
  j["rows"] = ordered_json::array();
  for (const auto& r : t.rows) {
    ordered_json row;
    row["projection_id"] = r.projection_id;
    row["sc"] = r.metric.sc;
    row["stress"] = r.metric.stress;
    row["np"] = r.metric.np;
    row["np_k"] = r.metric.np_k;
    row["rating"] = r.rating;
    j["rows"].push_back(row);
  }
  return j.dump(2) + "\n";
}

TrainingSet training_set_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    TrainingSet t;
    t.user_id = j.value("user_id", std::string{});
    for (const auto& row : j.at("rows")) {
      TrainingRow r;
      r.projection_id = row.at("projection_id").get<std::string>();
      r.metric.sc = row.at("sc").get<double>();
      r.metric.stress = row.at("stress").get<double>();
      r.metric.np = row.at("np").get<double>();
      r.metric.np_k = row.value("np_k", kDefaultNeighborhoodSize);
      r.rating = row.at("rating").get<double>();
      t.rows.push_back(std::move(r));
    }
    return t;
  } catch (const json::exception& e) {
    throw DataError(std::string("bad training set JSON: ") + e.what());
  }
}

}  // namespace projscope
