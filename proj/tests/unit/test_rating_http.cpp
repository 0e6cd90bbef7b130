#include <thread>

#include "projscope/rating_service.hpp"
#include "run_fixture.hpp"
#include "scratch.hpp"

#include <gtest/gtest.h>
#include <httplib.h>
#include <json.hpp>

using namespace projscope;
using nlohmann::json;
using testing_support::ScratchDir;

namespace {

class HttpTest : public ::testing::Test {
 protected:
  void SetUp() override {
    testing_support::make_small_run(dir_.path());
    dir_.write("ui/index.html", "<html>rating ui</html>");
    service_ = std::make_unique<RatingService>(dir_.path(), testing_support::slurp(PROJSCOPE_CONFIG_DIR "/guidelines.txt"));
    server_ = std::make_unique<RatingHttpServer>(*service_, dir_ / "ui");
    port_ = server_->bind_to_any_port("127.0.0.1");
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }

  void TearDown() override {
    server_->stop();
    if (thread_.joinable()) thread_.join();
  }

  json post(const std::string& path, const json& body, int expected) {
    auto res = client_->Post(path, body.dump(), "application/json");
    EXPECT_TRUE(res);
    if (!res) return {};
    EXPECT_EQ(res->status, expected) << res->body;
    return json::parse(res->body);
  }

  json get(const std::string& path, int expected) {
    auto res = client_->Get(path);
    EXPECT_TRUE(res);
    if (!res) return {};
    EXPECT_EQ(res->status, expected) << res->body;
    return json::parse(res->body);
  }

  ScratchDir dir_;
  std::unique_ptr<RatingService> service_;
  std::unique_ptr<RatingHttpServer> server_;
  std::unique_ptr<httplib::Client> client_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace

TEST_F(HttpTest, FullRatingFlow) {
  const json session = post("/sessions", {{"user_id", "u1"}, {"seed", 11}}, 201);
  const std::string sid = session.at("session_id");
  EXPECT_EQ(session.at("total"), 10);

  const std::string guidelines = testing_support::slurp(PROJSCOPE_CONFIG_DIR "/guidelines.txt");
  for (int i = 0; i < 10; ++i) {
    const json item = get("/sessions/" + sid + "/next", 200);
    EXPECT_EQ(item.at("done"), false);
    EXPECT_EQ(item.at("cursor"), i);
    EXPECT_EQ(item.at("coords").size(), 150u);
    EXPECT_EQ(item.at("guidelines"), guidelines);
    EXPECT_FALSE(item.contains("technique"));
    const json ack = post("/sessions/" + sid + "/ratings",
                          {{"projection_id", item.at("projection_id")}, {"score", 1 + i % 5}}, 201);
    EXPECT_EQ(ack.at("cursor"), i + 1);
  }
  EXPECT_EQ(get("/sessions/" + sid + "/next", 200).at("done"), true);

  const json exported = get("/users/u1/export", 200);
  EXPECT_EQ(exported.at("user_id"), "u1");
  EXPECT_EQ(exported.at("rows").size(), 10u);
}

TEST_F(HttpTest, ErrorStatuses) {
  get("/sessions/s-missing/next", 404);
  post("/sessions", {{"user_id", "bad/user"}, {"seed", 1}}, 400);
  post("/sessions", {{"seed", 1}}, 400);

  const std::string sid = post("/sessions", {{"user_id", "u2"}, {"seed", 3}}, 201).at("session_id");
  const json item = get("/sessions/" + sid + "/next", 200);
  post("/sessions/" + sid + "/ratings", {{"projection_id", item.at("projection_id")}, {"score", 6}}, 400);
  post("/sessions/" + sid + "/ratings", {{"projection_id", "item-nope"}, {"score", 3}}, 400);
  auto raw = client_->Post("/sessions/" + sid + "/ratings", "{not json", "application/json");
  ASSERT_TRUE(raw);
  EXPECT_EQ(raw->status, 400);
  EXPECT_EQ(get("/sessions/" + sid + "/next", 200).at("cursor"), 0);
  get("/users/u2/export", 422);
}

TEST_F(HttpTest, RevisitEndpoint) {
  const std::string sid = post("/sessions", {{"user_id", "u3"}, {"seed", 3}}, 201).at("session_id");
  for (int i = 0; i < 2; ++i) {
    const json item = get("/sessions/" + sid + "/next", 200);
    post("/sessions/" + sid + "/ratings", {{"projection_id", item.at("projection_id")}, {"score", 2}}, 201);
  }
  const json back = post("/sessions/" + sid + "/revisit", {{"position", 0}}, 200);
  EXPECT_EQ(back.at("cursor"), 0);
  post("/sessions/" + sid + "/revisit", {{"position", 5}}, 400);
}

TEST_F(HttpTest, ServesStaticUi) {
  auto res = client_->Get("/index.html");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_NE(res->body.find("rating ui"), std::string::npos);
}
