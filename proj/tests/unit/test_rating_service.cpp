#include <algorithm>
#include <fstream>
#include <set>

#include <gtest/gtest.h>
#include <json.hpp>

#include "projscope/error.hpp"
#include "projscope/metric_table.hpp"
#include "projscope/rating_service.hpp"
#include "projscope/serialization.hpp"
#include "run_fixture.hpp"
#include "scratch.hpp"

using namespace projscope;
using testing_support::ScratchDir;
using testing_support::slurp;

namespace {

class RatingServiceTest : public ::testing::Test {
 protected:
  void SetUp() override { testing_support::make_small_run(dir_.path()); }

  std::map<std::string, MetricRow> table() const {
    std::map<std::string, MetricRow> out;
    for (const auto& r : read_metric_table(dir_ / kMetricTableFile)) out.emplace(r.projection_id, r);
    return out;
  }

  std::size_t log_lines(const std::string& user) const {
    const std::string text = slurp(ratings_path(dir_.path(), user));
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
  }

  ScratchDir dir_;
};

}  // namespace

TEST_F(RatingServiceTest, QueueIsSeededPermutation) {
  RatingService svc(dir_.path());
  const RatingSession a = svc.create_session("alice", 7);
  const RatingSession a2 = svc.create_session("alice", 7);
  const RatingSession b = svc.create_session("bob", 8);
  EXPECT_EQ(a.queue.size(), 10u);
  EXPECT_EQ(a.queue, a2.queue);
  EXPECT_NE(a.queue, b.queue);
  EXPECT_EQ(std::multiset<std::string>(a.queue.begin(), a.queue.end()),
            std::multiset<std::string>(b.queue.begin(), b.queue.end()));
  EXPECT_NE(a.session_id, a2.session_id);
  EXPECT_THROW(svc.get_next(a.session_id), NotFoundError);
}

TEST_F(RatingServiceTest, PayloadIsBlinded) {
  RatingService svc(dir_.path(), "rate carefully");
  const RatingSession s = svc.create_session("alice", 1);
  const std::set<std::string> allowed{"done", "session_id", "cursor", "total", "projection_id",
                                      "coords", "labels", "guidelines"};
  const auto tbl = table();
  for (int i = 0; i < 10; ++i) {
    const ItemPayload p = svc.get_next(s.session_id);
    EXPECT_EQ(p.cursor, static_cast<std::size_t>(i));
    EXPECT_EQ(p.coords.rows(), 150);
    EXPECT_EQ(p.labels.size(), 150u);
    EXPECT_EQ(p.guidelines, "rate carefully");
    const std::string text = payload_to_json(p);
    const auto j = nlohmann::json::parse(text);
    for (const auto& [key, value] : j.items()) EXPECT_TRUE(allowed.count(key)) << key;
    for (const char* word : {"lamp", "tsne", "umap", "technique", "perplexity", "fraction", "iris"})
      EXPECT_EQ(text.find(word), std::string::npos) << word;
    for (const auto& [id, row] : tbl) EXPECT_EQ(text.find(id), std::string::npos);
    svc.submit_rating(s.session_id, p.item_id, 3);
  }
  const ItemPayload done = svc.get_next(s.session_id);
  EXPECT_TRUE(done.done);
  EXPECT_EQ(done.cursor, 10u);
}

TEST_F(RatingServiceTest, InvalidSubmissionsLeaveCursor) {
  RatingService svc(dir_.path());
  const RatingSession s = svc.create_session("alice", 1);
  const ItemPayload p = svc.get_next(s.session_id);
  EXPECT_THROW(svc.submit_rating(s.session_id, p.item_id, 6), ArgumentError);
  EXPECT_THROW(svc.submit_rating(s.session_id, p.item_id, 0), ArgumentError);
  EXPECT_THROW(svc.submit_rating(s.session_id, "item-0000000000000000", 3), ArgumentError);
  EXPECT_EQ(svc.session(s.session_id).cursor, 0u);
  EXPECT_FALSE(std::filesystem::exists(ratings_path(dir_.path(), "alice")));

  svc.submit_rating(s.session_id, p.item_id, 4);
  EXPECT_EQ(svc.session(s.session_id).cursor, 1u);
  EXPECT_EQ(log_lines("alice"), 1u);
}

TEST_F(RatingServiceTest, ThreeScoreRoundTrip) {
  RatingService svc(dir_.path());
  const RatingSession s = svc.create_session("u1", 5);
  const int scores[] = {2, 5, 3};
  std::vector<std::string> rated;
  for (int score : scores) {
    const ItemPayload p = svc.get_next(s.session_id);
    rated.push_back(svc.submit_rating(s.session_id, p.item_id, score).projection_id);
  }
  const auto latest = latest_scores(read_ratings_log(ratings_path(dir_.path(), "u1")));
  ASSERT_EQ(latest.size(), 3u);
  EXPECT_EQ(latest.at(rated[0]), 2);
  EXPECT_EQ(latest.at(rated[1]), 5);
  EXPECT_EQ(latest.at(rated[2]), 3);
  EXPECT_THROW(svc.export_training_set("u1"), DataError);

  for (int i = 0; i < 5; ++i) {
    const ItemPayload p = svc.get_next(s.session_id);
    svc.submit_rating(s.session_id, p.item_id, 1 + i % 5);
  }
  const TrainingSet t = svc.export_training_set("u1");
  ASSERT_EQ(t.rows.size(), 8u);
  const auto tbl = table();
  for (const auto& row : t.rows) {
    const MetricRow& m = tbl.at(row.projection_id);
    EXPECT_EQ(row.metric.sc, m.metric.sc);
    EXPECT_EQ(row.metric.stress, m.metric.stress);
    EXPECT_EQ(row.metric.np, m.metric.np);
  }
  for (std::size_t i = 0; i < 3; ++i) {
    const auto it = std::find_if(t.rows.begin(), t.rows.end(), [&](const TrainingRow& r) {
      return r.projection_id == rated[i];
    });
    ASSERT_NE(it, t.rows.end());
    EXPECT_EQ(it->rating, scores[i]);
  }
  EXPECT_EQ(training_set_to_json(t), training_set_to_json(svc.export_training_set("u1")));
}

TEST_F(RatingServiceTest, RevisitAndLatestWins) {
  RatingService svc(dir_.path());
  const RatingSession s = svc.create_session("carol", 2);
  for (int i = 0; i < 4; ++i) svc.submit_rating(s.session_id, svc.get_next(s.session_id).item_id, 2);
  svc.revisit(s.session_id, 1);
  const ItemPayload again = svc.get_next(s.session_id);
  EXPECT_EQ(again.cursor, 1u);
  const Rating r = svc.submit_rating(s.session_id, again.item_id, 5);
  EXPECT_EQ(r.projection_id, s.queue[1]);
  EXPECT_EQ(svc.session(s.session_id).cursor, 4u);
  EXPECT_EQ(log_lines("carol"), 5u);
  EXPECT_EQ(latest_scores(read_ratings_log(ratings_path(dir_.path(), "carol"))).at(s.queue[1]), 5);
  EXPECT_THROW(svc.revisit(s.session_id, 7), ArgumentError);
}

TEST_F(RatingServiceTest, ReplayRebuildsCursor) {
  std::string sid;
  {
    RatingService svc(dir_.path());
    sid = svc.create_session("dave", 3).session_id;
    for (int i = 0; i < 6; ++i) svc.submit_rating(sid, svc.get_next(sid).item_id, 4);
  }
  RatingService fresh(dir_.path());
  const RatingSession s = fresh.create_session("dave", 3);
  EXPECT_EQ(s.cursor, 6u);
  EXPECT_EQ(fresh.get_next(s.session_id).cursor, 6u);
}

TEST_F(RatingServiceTest, ExportErrors) {
  EXPECT_THROW(export_training_set("nobody", dir_.path()), DataError);
  RatingService svc(dir_.path());
  const RatingSession s = svc.create_session("erin", 3);
  for (int i = 0; i < 9; ++i) svc.submit_rating(s.session_id, svc.get_next(s.session_id).item_id, 3);
  std::filesystem::remove(dir_ / kMetricTableFile);
  EXPECT_THROW(export_training_set("erin", dir_.path()), DataError);
}

TEST_F(RatingServiceTest, UserIdsAreRestricted) {
  RatingService svc(dir_.path());
  EXPECT_THROW(svc.create_session("../evil", 1), ArgumentError);
  EXPECT_THROW(svc.create_session("", 1), ArgumentError);
}

TEST(RatingLog, JsonLineRoundTrip) {
  const Rating r{"u2", "iris-lamp-f0.5-s42", 4, "2026-01-02T03:04:05.006Z"};
  const Rating back = rating_from_json(rating_to_json(r));
  EXPECT_EQ(back.user_id, r.user_id);
  EXPECT_EQ(back.projection_id, r.projection_id);
  EXPECT_EQ(back.score, 4);
  EXPECT_EQ(back.submitted_at, r.submitted_at);
  EXPECT_THROW(rating_from_json(R"({"user_id":"u","projection_id":"p","score":9,"submitted_at":""})"), DataError);
  EXPECT_THROW(rating_from_json("not json"), DataError);
}

TEST(RatingLog, LatestWins) {
  const std::vector<Rating> log{{"u", "a", 1, ""}, {"u", "b", 2, ""}, {"u", "a", 5, ""}};
  const auto latest = latest_scores(log);
  EXPECT_EQ(latest.at("a"), 5);
  EXPECT_EQ(latest.at("b"), 2);
}
