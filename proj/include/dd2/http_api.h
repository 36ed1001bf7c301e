#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <string>

#include "dd2/error.h"
#include "dd2/service.h"

namespace httplib {
class Server;
}

namespace dd2 {

// Scenarios a server may start sessions from, keyed by file stem.
using ScenarioCatalog = std::map<std::string, std::shared_ptr<const Scenario>>;

// Loads every *.json in `dir` that validates without errors.
ScenarioCatalog load_catalog(const std::filesystem::path& dir);

// The /v1 HTTP+JSON API over a GameMaster. Error bodies are {code, message,
// details?}. With a non-empty token every route except /v1/healthz demands
// "Authorization: Bearer <token>".
class HttpApi {
 public:
  HttpApi(GameMaster& gm, ScenarioCatalog catalog, std::string token = {});
  ~HttpApi();

  // Blocking; returns when stop() is called or binding fails (false).
  bool listen(const std::string& host, int port);
  // Binds to an ephemeral port, returns it; then call listen_after_bind().
  int bind_any(const std::string& host);
  bool listen_after_bind();
  void stop();
  void wait_until_ready() const;

 private:
  void routes();

  GameMaster& gm_;
  ScenarioCatalog catalog_;
  std::string token_;
  std::unique_ptr<httplib::Server> server_;
  std::atomic<bool> stopping_{false};
};

int http_status_for(ErrorCode c);

}  // namespace dd2
