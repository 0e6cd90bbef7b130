#include "projscope/rating_service.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>

#include <json.hpp>

#include "projscope/error.hpp"
#include "projscope/harness.hpp"
#include "projscope/metric_table.hpp"
#include "projscope/projection.hpp"
#include "projscope/rng.hpp"

namespace projscope {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::size_t first_unrated(const std::vector<std::string>& queue, const std::set<std::string>& rated) {
  std::size_t c = 0;
  while (c < queue.size() && rated.count(queue[c])) ++c;
  return c;
}

}  // namespace

std::string rating_to_json(const Rating& r) {
  ordered_json j;
  j["user_id"] = r.user_id;
  j["projection_id"] = r.projection_id;
  j["score"] = r.score;
  j["submitted_at"] = r.submitted_at;
  return j.dump();
}

Rating rating_from_json(const std::string& line) {
  try {
    const json j = json::parse(line);
    Rating r;
    r.user_id = j.at("user_id").get<std::string>();
    r.projection_id = j.at("projection_id").get<std::string>();
    r.score = j.at("score").get<int>();
    r.submitted_at = j.value("submitted_at", std::string{});
    if (r.score < 1 || r.score > 5) throw DataError("rating score outside 1..5 in log");
    return r;
  } catch (const json::exception& e) {
    throw DataError(std::string("bad rating record: ") + e.what());
  }
}

std::vector<Rating> read_ratings_log(const std::filesystem::path& path) {
  std::vector<Rating> out;
  std::ifstream in(path);
  if (!in) return out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(rating_from_json(line));
  }
  return out;
}

std::map<std::string, int> latest_scores(const std::vector<Rating>& log) {
  std::map<std::string, int> out;
  for (const auto& r : log) out[r.projection_id] = r.score;
  return out;
}

std::filesystem::path ratings_path(const std::filesystem::path& run_dir, const std::string& user_id) {
  const bool ok = !user_id.empty() && std::all_of(user_id.begin(), user_id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
  }) && user_id != "." && user_id != "..";
  if (!ok) throw ArgumentError("user id '" + user_id + "' may only contain letters, digits, '-', '_' and '.'");
  return run_dir / "ratings" / ("ratings_" + user_id + ".jsonl");
}

std::string payload_to_json(const ItemPayload& p) {
  ordered_json j;
  j["done"] = p.done;
  j["session_id"] = p.session_id;
  j["cursor"] = p.cursor;
  j["total"] = p.total;
  if (!p.done) {
    j["projection_id"] = p.item_id;
    ordered_json coords = ordered_json::array();
    for (Eigen::Index i = 0; i < p.coords.rows(); ++i) coords.push_back({p.coords(i, 0), p.coords(i, 1)});
    j["coords"] = std::move(coords);
    j["labels"] = p.labels;
    j["guidelines"] = p.guidelines;
  }
  return j.dump();
}

std::vector<std::string> session_queue(const std::vector<std::string>& ids, const std::string& user_id,
                                       std::uint64_t seed) {
  std::vector<std::string> queue = ids;
  std::sort(queue.begin(), queue.end());
  Rng rng(derive_seed(seed, {hash_string(user_id)}));
  rng.shuffle(queue);
  return queue;
}

TrainingSet export_training_set(const std::string& user_id, const std::filesystem::path& run_dir) {
  const auto latest = latest_scores(read_ratings_log(ratings_path(run_dir, user_id)));
  if (latest.empty()) throw DataError("user '" + user_id + "' has not rated any projection in this run");
  const auto table_path = run_dir / kMetricTableFile;
  if (!std::filesystem::exists(table_path))
    throw DataError("metric table missing: run `evaluate` on " + run_dir.string() + " first");
  const MetricTable table = read_metric_table(table_path);

  TrainingSet t;
  t.user_id = user_id;
  std::set<std::string> joined;
  for (const auto& row : table) {
    const auto it = latest.find(row.projection_id);
    if (it == latest.end()) continue;
    t.rows.push_back({row.metric, static_cast<double>(it->second), row.projection_id});
    joined.insert(row.projection_id);
  }
  for (const auto& [id, score] : latest)
    if (!joined.count(id)) throw DataError("rated projection '" + id + "' is missing from the metric table");
  if (t.rows.size() < kMinTrainingRows) {
    throw DataError("user '" + user_id + "' rated " + std::to_string(t.rows.size()) + " projections, at least " +
                    std::to_string(kMinTrainingRows) + " required");
  }
  return t;
}

RatingService::RatingService(std::filesystem::path run_dir, std::string guidelines)
    : run_dir_(std::move(run_dir)), guidelines_(std::move(guidelines)) {
  projection_ids_ = list_projection_ids(run_dir_);
}

std::string RatingService::default_guidelines() {
  return "Rate each plot from 1 (poor) to 5 (excellent) using only what you see. Consider whether nearby and "
         "far-apart groups look faithfully arranged, whether the coloured classes form clearly separated groups, "
         "and how clean and readable the plot is overall.";
}

RatingService::Live& RatingService::live(const std::string& session_id) {
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw NotFoundError("unknown session '" + session_id + "'");
  return it->second;
}

const std::vector<int>& RatingService::labels_for(const std::string& dataset_id) {
  auto it = labels_.find(dataset_id);
  if (it != labels_.end()) return it->second;
  const SweepConfig cfg = load_sweep_config(run_dir_ / "sweep.json");
  Dataset ds = prepare_dataset(cfg, dataset_id, run_dir_);
  return labels_.emplace(dataset_id, std::move(ds.labels)).first->second;
}

const RatingService::ProjectionView& RatingService::view(const std::string& projection_id) {
  auto it = views_.find(projection_id);
  if (it != views_.end()) return it->second;
  Projection p = read_projection(run_dir_ / "projections", projection_id);
  return views_.emplace(projection_id, ProjectionView{std::move(p.coords), p.dataset_id}).first->second;
}

RatingSession RatingService::create_session(const std::string& user_id, std::uint64_t seed) {
  ratings_path(run_dir_, user_id);
  std::lock_guard lock(mutex_);
  if (projection_ids_.empty()) throw DataError("run " + run_dir_.string() + " contains no projections");

  if (auto old = session_of_user_.find(user_id); old != session_of_user_.end()) sessions_.erase(old->second);

  Live l;
  l.state.user_id = user_id;
  l.state.session_id =
      "s-" + hex64(derive_seed(seed, {hash_string(user_id), ++session_counter_, hash_string(run_dir_.string())}));
  l.state.queue = session_queue(projection_ids_, user_id, seed);
  std::set<std::string> rated;
  for (const auto& [id, score] : latest_scores(read_ratings_log(ratings_path(run_dir_, user_id)))) rated.insert(id);
  l.state.cursor = first_unrated(l.state.queue, rated);
  const std::uint64_t salt = hash_string(l.state.session_id);
  for (const auto& id : l.state.queue) {
    std::string alias = "item-" + hex64(derive_seed(salt, {hash_string(id)}));
    l.alias_to_id.emplace(alias, id);
    l.aliases.push_back(std::move(alias));
  }
  session_of_user_[user_id] = l.state.session_id;
  RatingSession out = l.state;
  sessions_.emplace(out.session_id, std::move(l));
  return out;
}

ItemPayload RatingService::get_next(const std::string& session_id) {
  std::lock_guard lock(mutex_);
  Live& l = live(session_id);
  ItemPayload p;
  p.session_id = session_id;
  p.cursor = l.state.cursor;
  p.total = l.state.queue.size();
  if (l.state.cursor >= l.state.queue.size()) {
    p.done = true;
    return p;
  }
  const ProjectionView& v = view(l.state.queue[l.state.cursor]);
  p.item_id = l.aliases[l.state.cursor];
  p.coords = v.coords;
  p.labels = labels_for(v.dataset_id);
  p.guidelines = guidelines_;
  return p;
}

Rating RatingService::submit_rating(const std::string& session_id, const std::string& item_id, int score) {
  std::lock_guard lock(mutex_);
  Live& l = live(session_id);
  if (score < 1 || score > 5) throw ArgumentError("score must be an integer from 1 to 5");
  if (l.state.cursor >= l.state.queue.size()) throw ArgumentError("session is complete; nothing to rate");
  if (item_id != l.aliases[l.state.cursor]) throw ArgumentError("projection '" + item_id + "' is not the current item");

  Rating r{l.state.user_id, l.state.queue[l.state.cursor], score, utc_now()};
  const auto path = ratings_path(run_dir_, l.state.user_id);
  std::filesystem::create_directories(path.parent_path());
  {
    std::ofstream out(path, std::ios::app | std::ios::binary);
    if (!out) throw DataError("cannot append to " + path.string());
    out << rating_to_json(r) << '\n';
    out.flush();
    if (!out) throw DataError("write failed for " + path.string());
  }
  std::set<std::string> rated;
  for (const auto& [id, s] : latest_scores(read_ratings_log(path))) rated.insert(id);
  l.state.cursor = first_unrated(l.state.queue, rated);
  return r;
}

void RatingService::revisit(const std::string& session_id, std::size_t position) {
  std::lock_guard lock(mutex_);
  Live& l = live(session_id);
  if (position > l.state.cursor) throw ArgumentError("can only revisit already-rated positions");
  l.state.cursor = position;
}

RatingSession RatingService::session(const std::string& session_id) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw NotFoundError("unknown session '" + session_id + "'");
  return it->second.state;
}

TrainingSet RatingService::export_training_set(const std::string& user_id) const {
  std::lock_guard lock(mutex_);
  return projscope::export_training_set(user_id, run_dir_);
}

}  // namespace projscope
