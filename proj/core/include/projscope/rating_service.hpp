#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "projscope/learning.hpp"

namespace projscope {

class NotFoundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Rating {
  std::string user_id;
  std::string projection_id;
  int score = 0;
  std::string submitted_at;
};

std::string rating_to_json(const Rating& r);
Rating rating_from_json(const std::string& line);

/// Every record of an append-only ratings log, in file order. Missing file
/// yields an empty list.
std::vector<Rating> read_ratings_log(const std::filesystem::path& path);

/// Latest score per projection id.
std::map<std::string, int> latest_scores(const std::vector<Rating>& log);

std::filesystem::path ratings_path(const std::filesystem::path& run_dir, const std::string& user_id);

struct RatingSession {
  std::string session_id;
  std::string user_id;
  std::vector<std::string> queue;
  std::size_t cursor = 0;
};

/// What the rater sees. It carries no technique, parameter or real projection
/// id; `item_id` is a per-session alias.
struct ItemPayload {
  bool done = false;
  std::string session_id;
  std::size_t cursor = 0;
  std::size_t total = 0;
  std::string item_id;
  Eigen::MatrixXd coords;
  std::vector<int> labels;
  std::string guidelines;
};

std::string payload_to_json(const ItemPayload& p);

/// Seeded per-user permutation of `ids`.
std::vector<std::string> session_queue(const std::vector<std::string>& ids, const std::string& user_id,
                                       std::uint64_t seed);

/// Joins the latest ratings in `<run>/ratings/ratings_<user>.jsonl` with the
/// run's metric table. Rows follow metric-table order.
TrainingSet export_training_set(const std::string& user_id, const std::filesystem::path& run_dir);

/// Session bookkeeping over one run directory. Thread-safe; all writes are
/// serialised.
class RatingService {
 public:
  explicit RatingService(std::filesystem::path run_dir, std::string guidelines = default_guidelines());

  static std::string default_guidelines();

  /// Replaces any live session of the same user. The cursor is rebuilt from
  /// the user's log.
  RatingSession create_session(const std::string& user_id, std::uint64_t seed);
  ItemPayload get_next(const std::string& session_id);
  /// `item_id` must be the alias of the session's current item.
  Rating submit_rating(const std::string& session_id, const std::string& item_id, int score);
  /// Moves the cursor back to an already-rated position.
  void revisit(const std::string& session_id, std::size_t position);
  RatingSession session(const std::string& session_id) const;
  TrainingSet export_training_set(const std::string& user_id) const;

  const std::filesystem::path& run_dir() const { return run_dir_; }

 private:
  struct Live {
    RatingSession state;
    std::map<std::string, std::string> alias_to_id;
    std::vector<std::string> aliases;
  };
  struct ProjectionView {
    Eigen::MatrixXd coords;
    std::string dataset_id;
  };

  Live& live(const std::string& session_id);
  const ProjectionView& view(const std::string& projection_id);
  const std::vector<int>& labels_for(const std::string& dataset_id);

  std::filesystem::path run_dir_;
  std::string guidelines_;
  std::vector<std::string> projection_ids_;
  mutable std::mutex mutex_;
  std::map<std::string, Live> sessions_;
  std::map<std::string, std::string> session_of_user_;
  std::map<std::string, ProjectionView> views_;
  std::map<std::string, std::vector<int>> labels_;
  std::uint64_t session_counter_ = 0;
};

/// HTTP front end for RatingService:
///   POST /sessions {user_id, seed}
///   GET  /sessions/:id/next
///   POST /sessions/:id/ratings {projection_id, score}
///   POST /sessions/:id/revisit {position}
///   GET  /users/:id/export
/// Optionally serves static assets (the rating UI) from `static_dir`.
class RatingHttpServer {
 public:
  explicit RatingHttpServer(RatingService& service, std::optional<std::filesystem::path> static_dir = {});
  ~RatingHttpServer();
  RatingHttpServer(const RatingHttpServer&) = delete;
  RatingHttpServer& operator=(const RatingHttpServer&) = delete;

  /// Blocks until stop().
  bool listen(const std::string& host, int port);
  int bind_to_any_port(const std::string& host);
  bool listen_after_bind();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace projscope
