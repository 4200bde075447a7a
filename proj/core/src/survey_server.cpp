#include "atelier/survey_server.hpp"

#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>

namespace atelier::survey {
namespace fs = std::filesystem;

struct SurveyServer::Impl {
  SurveyService& service;
  ServerOptions options;
  httplib::Server http;
  std::thread thread;
  int port = -1;

  Impl(SurveyService& s, ServerOptions o) : service(s), options(std::move(o)) { routes(); }

  static void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static void send_error(httplib::Response& res, int status, const std::string& message) {
    send_json(res, status, {{"error", message}});
  }

  static int status_of(SurveyError::Kind kind) {
    switch (kind) {
      case SurveyError::Kind::validation: return 400;
      case SurveyError::Kind::not_found: return 404;
      case SurveyError::Kind::conflict: return 409;
      case SurveyError::Kind::state: return 500;
    }
    return 500;
  }

  /// Runs a handler, translating library exceptions into HTTP errors.
  template <typename F>
  auto guarded(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
      try {
        f(req, res);
      } catch (const SurveyError& e) {
        send_error(res, status_of(e.kind()), e.what());
      } catch (const nlohmann::json::exception& e) {
        send_error(res, 400, std::string("malformed request body: ") + e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, e.what());
      }
    };
  }

  static std::string content_type(const fs::path& p) {
    auto ext = p.extension().string();
    for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (ext == ".png") return "image/png";
    if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
    if (ext == ".bmp") return "image/bmp";
    if (ext == ".webp") return "image/webp";
    return "application/octet-stream";
  }

  void routes() {
    http.Post("/api/session", guarded([this](const httplib::Request&, httplib::Response& res) {
      send_json(res, 201, {{"session_id", service.create_session()}});
    }));

    http.Get("/api/session/:id/batch", guarded([this](const httplib::Request& req,
                                                      httplib::Response& res) {
      auto items = nlohmann::json::array();
      for (const auto& item : service.batch(req.path_params.at("id"))) {
        items.push_back(
            {{"item_id", item.item_id}, {"image_url", item.image_url}, {"caption", item.caption}});
      }
      send_json(res, 200, {{"items", std::move(items)}});
    }));

    http.Post("/api/session/:id/rating", guarded([this](const httplib::Request& req,
                                                        httplib::Response& res) {
      const auto body = nlohmann::json::parse(req.body);
      auto int_field = [&](const char* key) {
        const auto& v = body.at(key);
        if (!v.is_number_integer()) {
          throw SurveyError(SurveyError::Kind::validation, std::string(key) + " must be an integer");
        }
        return v.get<int>();
      };
      if (!body.at("perceived_real").is_boolean()) {
        throw SurveyError(SurveyError::Kind::validation, "perceived_real must be a boolean");
      }
      RatingSubmission rating{body.at("item_id").get<std::string>(),
                              body.at("perceived_real").get<bool>(), int_field("pretty"),
                              int_field("caption_accuracy")};
      service.submit(req.path_params.at("id"), rating);
      send_json(res, 201, {{"ok", true}});
    }));

    http.Get("/api/session/:id/image/:item", guarded([this](const httplib::Request& req,
                                                            httplib::Response& res) {
      const auto served = service.decode(req.path_params.at("id"), req.path_params.at("item"));
      const auto path = service.pools().resolve(service.entry(served));
      std::ifstream in(path, std::ios::binary);
      if (!in) throw SurveyError(SurveyError::Kind::state, "image file missing on server");
      std::ostringstream bytes;
      bytes << in.rdbuf();
      res.status = 200;
      res.set_content(bytes.str(), content_type(path));
    }));

    http.Get("/api/results", guarded([this](const httplib::Request& req, httplib::Response& res) {
      if (options.admin_token.empty()) {
        send_error(res, 403, "results endpoint disabled: no admin token configured");
        return;
      }
      if (req.get_header_value("Authorization") != "Bearer " + options.admin_token) {
        send_error(res, 401, "admin token required");
        return;
      }
      send_json(res, 200, service.report().to_json());
    }));

    if (!options.static_dir.empty()) {
      if (!http.set_mount_point("/", options.static_dir.string())) {
        throw Error("static directory not found: " + options.static_dir.string());
      }
    }
  }

  void bind() {
    if (options.port == 0) {
      port = http.bind_to_any_port(options.host);
    } else if (http.bind_to_port(options.host, options.port)) {
      port = options.port;
    }
    if (port < 0) {
      throw Error("cannot bind " + options.host + ":" + std::to_string(options.port));
    }
  }
};

SurveyServer::SurveyServer(SurveyService& service, ServerOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {}

SurveyServer::~SurveyServer() { stop(); }

int SurveyServer::start() {
  impl_->bind();
  impl_->thread = std::thread([this] { impl_->http.listen_after_bind(); });
  impl_->http.wait_until_ready();
  return impl_->port;
}

void SurveyServer::serve() {
  impl_->bind();
  impl_->http.listen_after_bind();
}

void SurveyServer::stop() {
  impl_->http.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

int SurveyServer::port() const { return impl_->port; }

}  // namespace atelier::survey
