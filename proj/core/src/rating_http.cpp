
#include "projscope/error.hpp"
#include "projscope/rating_service.hpp"
#include "projscope/serialization.hpp"

#include <httplib.h>
#include <json.hpp>

namespace projscope {

using nlohmann::json;

struct RatingHttpServer::Impl {
  RatingService& service;
  httplib::Server server;

  explicit Impl(RatingService& s) : service(s) {}

  template <typename Handler>
  static void guarded(httplib::Response& res, Handler&& h) {
    try {
      h();
    } catch (const NotFoundError& e) {
      reply_error(res, 404, e.what());
    } catch (const ArgumentError& e) {
      reply_error(res, 400, e.what());
    } catch (const json::exception& e) {
      reply_error(res, 400, std::string("malformed JSON body: ") + e.what());
    } catch (const DataError& e) {
      reply_error(res, 422, e.what());
    } catch (const std::exception& e) {
      reply_error(res, 500, e.what());
    }
  }

  static void reply_error(httplib::Response& res, int status, const std::string& msg) {
    res.status = status;
    res.set_content(json{{"error", msg}}.dump(), "application/json");
  }

  void install_routes() {
    server.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const json body = json::parse(req.body);
        const std::string user = body.at("user_id").get<std::string>();
        const std::uint64_t seed = body.value("seed", std::uint64_t{0});
        const RatingSession s = service.create_session(user, seed);
        res.status = 201;
        res.set_content(json{{"session_id", s.session_id},
                             {"user_id", s.user_id},
                             {"cursor", s.cursor},
                             {"total", s.queue.size()}}
                            .dump(),
                        "application/json");
      });
    });
    server.Get(R"(/sessions/([^/]+)/next)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { res.set_content(payload_to_json(service.get_next(req.matches[1])), "application/json"); });
    });
    server.Post(R"(/sessions/([^/]+)/ratings)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const json body = json::parse(req.body);
        const auto& score = body.at("score");
        if (!score.is_number_integer()) throw ArgumentError("score must be an integer from 1 to 5");
        service.submit_rating(req.matches[1], body.at("projection_id").get<std::string>(), score.get<int>());
        const RatingSession s = service.session(req.matches[1]);
        res.status = 201;
        res.set_content(json{{"cursor", s.cursor}, {"total", s.queue.size()}}.dump(), "application/json");
      });
    });
    server.Post(R"(/sessions/([^/]+)/revisit)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const json body = json::parse(req.body);
        service.revisit(req.matches[1], body.at("position").get<std::size_t>());
        res.set_content(payload_to_json(service.get_next(req.matches[1])), "application/json");
      });
    });
    server.Get(R"(/users/([^/]+)/export)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        res.set_content(training_set_to_json(service.export_training_set(req.matches[1])), "application/json");
      });
    });
  }
};

RatingHttpServer::RatingHttpServer(RatingService& service, std::optional<std::filesystem::path> static_dir)
    : impl_(std::make_unique<Impl>(service)) {
  impl_->install_routes();
  if (static_dir && std::filesystem::is_directory(*static_dir)) impl_->server.set_mount_point("/", static_dir->string());
}

RatingHttpServer::~RatingHttpServer() { stop(); }

bool RatingHttpServer::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }

int RatingHttpServer::bind_to_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }

bool RatingHttpServer::listen_after_bind() { return impl_->server.listen_after_bind(); }

void RatingHttpServer::stop() {
  if (impl_) impl_->server.stop();
}

void RatingHttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace projscope
