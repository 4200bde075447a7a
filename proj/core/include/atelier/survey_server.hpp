#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "atelier/survey.hpp"

namespace atelier::survey {

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  /// Bearer token required by GET /api/results. Empty disables the endpoint.
  std::string admin_token;
  /// Optional directory of static client files served at "/".
  std::filesystem::path static_dir;
};

/// HTTP front end of a SurveyService:
///   POST /api/session                      -> {session_id}
///   GET  /api/session/{id}/batch           -> {items: [{item_id, image_url, caption}]}
///   POST /api/session/{id}/rating          -> 201, 400 invalid, 404 unknown, 409 duplicate
///   GET  /api/session/{id}/image/{item_id} -> image bytes
///   GET  /api/results                      -> SurveyReport (admin token)
class SurveyServer {
 public:
  SurveyServer(SurveyService& service, ServerOptions options);
  ~SurveyServer();

  /// Binds and serves on a background thread; returns the bound port.
  int start();
  /// Binds and serves on the calling thread until stop().
  void serve();
  void stop();
  int port() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace atelier::survey
