#include "dd2/http_api.h"

#include <fstream>
#include <random>
#include <sstream>

#include "dd2/error.h"
#include "httplib.h"

namespace dd2 {

using nlohmann::json;
namespace fs = std::filesystem;

int http_status_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::SessionNotFound: return 404;
    case ErrorCode::ConcurrentConflict: return 409;
    case ErrorCode::Unauthorized: return 401;
    case ErrorCode::StoreUnavailable: return 503;
    case ErrorCode::BadRequest:
    case ErrorCode::ParseError:
    case ErrorCode::SchemaError:
    case ErrorCode::InvalidOverride:
    case ErrorCode::UnknownIdentifier: return 400;
    case ErrorCode::LogCorrupt:
    case ErrorCode::VersionMismatch:
    case ErrorCode::PolicyIllegalAction: return 500;
    default: return 422;  // rule violations: the request was understood but not allowed
  }
}

ScenarioCatalog load_catalog(const fs::path& dir) {
  ScenarioCatalog out;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& p : files) {
    try {
      auto s = std::make_shared<const Scenario>(load_scenario_file(p));
      if (validate_scenario(*s).ok()) out.emplace(p.stem().string(), std::move(s));
    } catch (const Error&) {
      // Fixtures and broken drafts are simply not offered.
    }
  }
  return out;
}

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const Error& e) { send_json(res, http_status_for(e.code()), e.to_json()); }

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    json j = json::parse(req.body);
    if (!j.is_object()) throw Error(ErrorCode::BadRequest, "request body must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::BadRequest, std::string("request body is not JSON: ") + e.what());
  }
}

std::optional<std::int64_t> expected_revision(const json& body, bool required) {
  auto it = body.find("expected_revision");
  if (it == body.end() || it->is_null()) {
    if (required) throw Error(ErrorCode::BadRequest, "expected_revision is required");
    return std::nullopt;
  }
  if (!it->is_number_integer()) throw Error(ErrorCode::BadRequest, "expected_revision must be an integer");
  return it->get<std::int64_t>();
}

json state_body(const std::string& id, const Snapshot& snap) {
  return {{"session_id", id}, {"revision", snap.revision}, {"view", snap.view_json}};
}

json mutation_body(const std::string& id, const MutationResult& r) {
  json body = state_body(id, *r.snapshot);
  if (r.feedback) body["feedback"] = public_feedback_json(*r.feedback);
  if (r.draw) body["draw"] = public_draw_json(*r.draw);
  return body;
}

template <class F>
httplib::Server::Handler guarded(F fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      send_error(res, e);
    } catch (const std::exception& e) {
      send_json(res, 500, {{"code", "Internal"}, {"message", e.what()}});
    }
  };
}

}  // namespace

HttpApi::HttpApi(GameMaster& gm, ScenarioCatalog catalog, std::string token)
    : gm_(gm), catalog_(std::move(catalog)), token_(std::move(token)), server_(std::make_unique<httplib::Server>()) {
  routes();
}

HttpApi::~HttpApi() { stop(); }

void HttpApi::routes() {
  auto& srv = *server_;

  srv.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
    if (token_.empty() || req.path == "/v1/healthz") return httplib::Server::HandlerResponse::Unhandled;
    if (req.get_header_value("Authorization") == "Bearer " + token_)
      return httplib::Server::HandlerResponse::Unhandled;
    send_error(res, Error(ErrorCode::Unauthorized, "missing or wrong facilitator token"));
    return httplib::Server::HandlerResponse::Handled;
  });

  srv.Get("/v1/healthz", guarded([this](const httplib::Request&, httplib::Response& res) {
            json names = json::array();
            for (const auto& [name, _] : catalog_) names.push_back(name);
            send_json(res, 200,
                      {{"status", "ok"},
                       {"engine_version", std::string(kEngineVersion)},
                       {"sessions", gm_.session_ids().size()},
                       {"scenarios", names}});
          }));

  srv.Post("/v1/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
             const json body = parse_body(req);
             if (!body.contains("scenario") || !body["scenario"].is_string())
               throw Error(ErrorCode::BadRequest, "'scenario' must name a scenario");
             const std::string name = body["scenario"].get<std::string>();
             auto it = catalog_.find(name);
             if (it == catalog_.end())
               throw Error(ErrorCode::UnknownIdentifier, "no scenario named '" + name + "'", {{"scenario", name}});
             std::uint64_t seed;
             if (body.contains("seed")) {
               if (!body["seed"].is_number_unsigned()) throw Error(ErrorCode::BadRequest, "'seed' must be unsigned");
               seed = body["seed"].get<std::uint64_t>();
             } else {
               std::random_device rd;
               seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
             }
             const json overrides = body.value("overrides", json(nullptr));
             const std::string id = gm_.create_session(it->second, seed, overrides);
             send_json(res, 201, state_body(id, *gm_.get_state(id)));
           }));

  srv.Get(R"(/v1/sessions/([A-Za-z0-9_-]+)/state)",
          guarded([this](const httplib::Request& req, httplib::Response& res) {
            const std::string id = req.matches[1];
            send_json(res, 200, state_body(id, *gm_.get_state(id)));
          }));

  srv.Post(R"(/v1/sessions/([A-Za-z0-9_-]+)/round/begin)",
           guarded([this](const httplib::Request& req, httplib::Response& res) {
             const std::string id = req.matches[1];
             const json body = parse_body(req);
             send_json(res, 200, mutation_body(id, gm_.begin_round(id, expected_revision(body, false))));
           }));

  srv.Post(R"(/v1/sessions/([A-Za-z0-9_-]+)/actions)",
           guarded([this](const httplib::Request& req, httplib::Response& res) {
             const std::string id = req.matches[1];
             const json body = parse_body(req);
             const auto rev = expected_revision(body, true);
             if (!body.contains("action")) throw Error(ErrorCode::BadRequest, "'action' is required");
             send_json(res, 200, mutation_body(id, gm_.act(id, rev, action_from_json(body["action"]))));
           }));

  srv.Get(R"(/v1/sessions/([A-Za-z0-9_-]+)/log)",
          guarded([this](const httplib::Request& req, httplib::Response& res) {
            res.status = 200;
            res.set_content(gm_.get_log(req.matches[1]), "application/x-ndjson");
          }));

  // Server-sent events: the current snapshot first, then one message per
  // later revision. Comment lines keep idle connections alive.
  srv.Get(R"(/v1/sessions/([A-Za-z0-9_-]+)/stream)",
          guarded([this](const httplib::Request& req, httplib::Response& res) {
            const std::string id = req.matches[1];
            gm_.get_state(id);  // SessionNotFound before headers go out
            res.set_header("Cache-Control", "no-cache");
            auto last = std::make_shared<std::int64_t>(-1);
            res.set_chunked_content_provider(
                "text/event-stream", [this, id, last](std::size_t, httplib::DataSink& sink) {
                  if (stopping_) return false;
                  SnapshotPtr snap = gm_.wait_for(id, *last, std::chrono::milliseconds(500));
                  if (stopping_) return false;
                  if (!snap) {
                    static const std::string ping = ": keepalive\n\n";
                    return sink.write(ping.data(), ping.size());
                  }
                  const std::string msg = "id: " + std::to_string(snap->revision) + "\nevent: state\ndata: " +
                                          json{{"revision", snap->revision}, {"view", snap->view_json}}.dump() +
                                          "\n\n";
                  *last = snap->revision;
                  return sink.write(msg.data(), msg.size());
                });
          }));
}

bool HttpApi::listen(const std::string& host, int port) { return server_->listen(host, port); }
int HttpApi::bind_any(const std::string& host) { return server_->bind_to_any_port(host); }
bool HttpApi::listen_after_bind() { return server_->listen_after_bind(); }
void HttpApi::wait_until_ready() const { server_->wait_until_ready(); }

void HttpApi::stop() {
  stopping_ = true;
  if (server_) server_->stop();
}

}  // namespace dd2
