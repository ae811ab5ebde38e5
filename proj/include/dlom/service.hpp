#pragma once

// HTTP/JSON facade over the repository, query language, decision sessions
// and synthesis. All routes live under /api/v1. Every non-2xx response body
// is a single ApiError object: {"code", "message", "detail"?}.

#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <utility>

#include <httplib.h>
#include <json.hpp>

#include "dlom/decision.hpp"
#include "dlom/error.hpp"
#include "dlom/query.hpp"
#include "dlom/record_json.hpp"
#include "dlom/repository.hpp"
#include "dlom/session.hpp"
#include "dlom/synthesis.hpp"
#include "dlom/triples.hpp"

namespace dlom {

inline constexpr std::string_view kApiBase = "/api/v1";

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::filesystem::path repository_root = "dlom-repo";
  bool read_only = false;
  std::chrono::seconds session_ttl{3600};
};

enum class ApiErrorCode { kBadRequest, kNotFound, kConflict, kProtocolError, kInternal };

inline std::string_view api_code_name(ApiErrorCode c) {
  switch (c) {
    case ApiErrorCode::kBadRequest: return "bad_request";
    case ApiErrorCode::kNotFound: return "not_found";
    case ApiErrorCode::kConflict: return "conflict";
    case ApiErrorCode::kProtocolError: return "protocol_error";
    case ApiErrorCode::kInternal: return "internal";
  }
  return "internal";
}

struct ApiError {
  ApiErrorCode code = ApiErrorCode::kInternal;
  std::string message;
  Json detail = nullptr;

  int http_status() const {
    switch (code) {
      case ApiErrorCode::kBadRequest: return 400;
      case ApiErrorCode::kNotFound: return 404;
      case ApiErrorCode::kConflict: return 409;
      case ApiErrorCode::kProtocolError: return 409;
      case ApiErrorCode::kInternal: return 500;
    }
    return 500;
  }

  Json to_json() const {
    Json j{{"code", api_code_name(code)}, {"message", message}};
    if (!detail.is_null()) j["detail"] = detail;
    return j;
  }

  static ApiError from(const Error& e) {
    ApiErrorCode code = ApiErrorCode::kBadRequest;
    switch (e.kind()) {
      case ErrorKind::kNotFound: code = ApiErrorCode::kNotFound; break;
      case ErrorKind::kConflict: code = ApiErrorCode::kConflict; break;
      case ErrorKind::kProtocol: code = ApiErrorCode::kProtocolError; break;
      case ErrorKind::kIo: code = ApiErrorCode::kInternal; break;
      default: break;
    }
    Json detail = e.detail();
    if (detail.is_null()) detail = Json{{"kind", to_string(e.kind())}};
    else if (detail.is_object()) detail["kind"] = to_string(e.kind());
    return {code, e.what(), detail};
  }
};

// The fields shown on a suggested-model card.
inline Json model_card_json(const ModelRecord& m) {
  Json methods = Json::array();
  for (OptimizationMethod x : m.optimization.methods) methods.push_back(method_name(x));
  auto perf = [&](double PerformanceReport::*field) -> Json {
    return m.performance ? Json((*m.performance).*field) : Json(nullptr);
  };
  return Json{{"total_cost", m.total_cost.to_string()},
              {"purpose", m.purpose},
              {"rating", m.rating_aggregate()},
              {"created_year", m.created_year},
              {"application_area", m.application_area},
              {"num_iot_devices", m.num_iot_devices},
              {"cost_per_device", m.device.price.to_string()},
              {"device_name", m.device.name},
              {"dln", m.dln.name},
              {"cloud", m.cloud.host_address},
              {"accuracy_pct", perf(&PerformanceReport::accuracy_pct)},
              {"system_latency_ms", perf(&PerformanceReport::system_latency_ms)},
              {"inference_latency_ms", perf(&PerformanceReport::inference_latency_ms)},
              {"stability_pct", perf(&PerformanceReport::stability_pct)},
              {"runtime_memory_mb", perf(&PerformanceReport::runtime_memory_mb)},
              {"optimization_methods", methods}};
}

class Service {
 public:
  // Opens the repository; throws kIo if the root cannot be opened.
  explicit Service(ServiceConfig config)
      : config_(std::move(config)), repo_(config_.repository_root) {
    routes();
  }

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  ~Service() { stop(); }

  // Binds and starts serving on a background thread. Throws kIo when the
  // port cannot be bound.
  void start() {
    // httplib's defaults add SO_REUSEPORT, which would let two servers share a port.
    server_.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof yes);
    });
    int port = config_.port;
    if (port == 0) {
      port = server_.bind_to_any_port(config_.host);
      if (port < 0) throw Error(ErrorKind::kIo, "cannot bind any port on " + config_.host);
    } else if (!server_.bind_to_port(config_.host, port)) {
      throw Error(ErrorKind::kIo, "cannot bind " + config_.host + ":" +
                                      std::to_string(port) + " (port in use?)");
    }
    bound_port_ = port;
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  // Blocks until stop() is called from another thread or a signal handler.
  void run() {
    start();
    if (thread_.joinable()) thread_.join();
  }

  // Stops accepting connections and waits for in-flight requests.
  void stop() {
    if (server_.is_running()) server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  int port() const { return bound_port_; }
  Repository& repository() { return repo_; }

 private:
  struct SessionSlot {
    std::mutex mu;
    DssSession session;
    std::chrono::steady_clock::time_point touched;
  };

  static std::string path(std::string_view suffix) {
    return std::string(kApiBase) + std::string(suffix);
  }

  static void send_json(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static void send_error(httplib::Response& res, const ApiError& err) {
    send_json(res, err.http_status(), err.to_json());
  }

  static Json parse_body(const httplib::Request& req, bool allow_empty = false) {
    if (req.body.empty()) {
      if (allow_empty) return Json::object();
      throw Error(ErrorKind::kInvalidInput, "request body is empty");
    }
    try {
      return Json::parse(req.body);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::kInvalidInput, std::string("malformed JSON body: ") + e.what(),
                  Json{{"byte", e.byte}});
    }
  }

  static std::string body_query_text(const Json& body) {
    auto it = body.find("query");
    if (!body.is_object() || it == body.end() || !it->is_string())
      throw Error(ErrorKind::kInvalidInput, "body must be {\"query\": string}");
    return it->get<std::string>();
  }

  template <typename Handler>
  httplib::Server::Handler guarded(Handler h) {
    return [h](const httplib::Request& req, httplib::Response& res) {
      try {
        h(req, res);
      } catch (const Error& e) {
        send_error(res, ApiError::from(e));
      } catch (const std::exception& e) {
        send_error(res, {ApiErrorCode::kInternal, e.what(), nullptr});
      }
    };
  }

  template <typename Handler>
  httplib::Server::Handler mutating(Handler h) {
    return guarded([this, h](const httplib::Request& req, httplib::Response& res) {
      if (config_.read_only)
        throw Error(ErrorKind::kInvalidInput, "service is read-only",
                    Json{{"read_only", true}});
      h(req, res);
    });
  }

  // ---- sessions ----------------------------------------------------------

  std::string new_session_id() {
    static constexpr char kHex[] = "0123456789abcdef";
    std::lock_guard lock(sessions_mu_);
    std::uniform_int_distribution<int> digit(0, 15);
    std::string id;
    do {
      id = "s" + std::to_string(++session_counter_) + "-";
      for (int i = 0; i < 8; ++i) id.push_back(kHex[digit(rng_)]);
    } while (sessions_.contains(id));
    return id;
  }

  void expire_sessions() {
    auto now = std::chrono::steady_clock::now();
    for (auto it = sessions_.begin(); it != sessions_.end();) {
      std::unique_lock slot_lock(it->second->mu, std::try_to_lock);
      if (slot_lock.owns_lock() && now - it->second->touched > config_.session_ttl)
        it = sessions_.erase(it);
      else
        ++it;
    }
  }

  std::shared_ptr<SessionSlot> find_session(const std::string& id) {
    std::lock_guard lock(sessions_mu_);
    expire_sessions();
    auto it = sessions_.find(id);
    if (it == sessions_.end())
      throw Error(ErrorKind::kNotFound, "no session with id '" + id + "'",
                  Json{{"session_id", id}});
    return it->second;
  }

  // Applies `event` under the session's own lock; events on one session are
  // serialized, distinct sessions proceed independently.
  DssSession apply(const std::string& id, const SessionEvent& event) {
    std::shared_ptr<SessionSlot> slot = find_session(id);
    std::lock_guard lock(slot->mu);
    slot->session = advance_session(slot->session, event, repo_);
    slot->touched = std::chrono::steady_clock::now();
    return slot->session;
  }

  Json ranking_json(const DssSession& s) {
    Json ranking = Json::array();
    for (const RankedModel& r : s.ranking) ranking.push_back(ranked_to_json(r));
    Json top = nullptr;
    if (!s.ranking.empty() && repo_.contains(s.ranking.front().id))
      top = model_card_json(repo_.get_model(s.ranking.front().id));
    return Json{{"session", s.id},
                {"state", state_name(s.state)},
                {"weights", weights_to_json(s.weights.value_or(ObjectiveWeights::uniform()))},
                {"ranking", ranking},
                {"top_model", top}};
  }

  // ---- routes ------------------------------------------------------------

  void routes() {
    server_.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
      if (!res.body.empty()) return;
      ApiError err{res.status == 404 ? ApiErrorCode::kNotFound : ApiErrorCode::kBadRequest,
                   "no route for " + req.method + " " + req.path, nullptr};
      res.set_content(err.to_json().dump(), "application/json");
    });

    server_.Get(path("/models"), guarded([this](const httplib::Request&, httplib::Response& res) {
      Json out = Json::array();
      for (const ModelRecord& m : repo_.list_models()) out.push_back(record_to_json(m));
      send_json(res, 200, out);
    }));

    server_.Post(path("/models"),
                 mutating([this](const httplib::Request& req, httplib::Response& res) {
                   ModelRecord r = record_from_json(parse_body(req));
                   repo_.add_model(r);
                   send_json(res, 201, record_to_json(r));
                 }));

    server_.Get(path("/models/:id"),
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  send_json(res, 200, record_to_json(repo_.get_model(req.path_params.at("id"))));
                }));

    server_.Delete(path("/models/:id"),
                   mutating([this](const httplib::Request& req, httplib::Response& res) {
                     send_json(res, 200,
                               record_to_json(repo_.remove_model(req.path_params.at("id"))));
                   }));

    server_.Get(path("/models/:id/triples"),
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  res.status = 200;
                  res.set_content(to_ntriples(repo_.export_triples(req.path_params.at("id"))),
                                  "text/plain");
                }));

    server_.Post(path("/query"), guarded([this](const httplib::Request& req,
                                                httplib::Response& res) {
      query::Query q = query::parse_query(body_query_text(parse_body(req)));
      Json models = Json::array();
      for (const ModelRecord& m : query::evaluate(q, repo_.list_models()))
        models.push_back(record_to_json(m));
      send_json(res, 200, Json{{"models", models}, {"canonical", query::print_query(q)}});
    }));

    server_.Get(path("/effects"), guarded([](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, effect_matrix_to_json());
    }));

    server_.Post(path("/sessions"),
                 guarded([this](const httplib::Request&, httplib::Response& res) {
                   auto slot = std::make_shared<SessionSlot>();
                   slot->session.id = new_session_id();
                   slot->touched = std::chrono::steady_clock::now();
                   Json body = session_to_json(slot->session);
                   {
                     std::lock_guard lock(sessions_mu_);
                     expire_sessions();
                     sessions_.emplace(slot->session.id, slot);
                   }
                   send_json(res, 201, body);
                 }));

    server_.Get(path("/sessions/:id"),
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  auto slot = find_session(req.path_params.at("id"));
                  std::lock_guard lock(slot->mu);
                  send_json(res, 200, session_to_json(slot->session));
                }));

    server_.Post(path("/sessions/:id/criteria"),
                 guarded([this](const httplib::Request& req, httplib::Response& res) {
                   query::Query q = query::parse_query(body_query_text(parse_body(req)));
                   DssSession s = apply(req.path_params.at("id"), event::SubmitCriteria{q});
                   send_json(res, 200, session_to_json(s));
                 }));

    server_.Post(path("/sessions/:id/run-query"),
                 guarded([this](const httplib::Request& req, httplib::Response& res) {
                   DssSession s = apply(req.path_params.at("id"), event::RunQuery{});
                   send_json(res, 200, session_to_json(s));
                 }));

    server_.Post(path("/sessions/:id/comparisons"),
                 guarded([this](const httplib::Request& req, httplib::Response& res) {
                   auto comparisons = comparisons_from_json(parse_body(req));
                   DssSession s = apply(req.path_params.at("id"),
                                        event::SubmitComparisons{std::move(comparisons)});
                   send_json(res, 200, session_to_json(s));
                 }));

    // An Elicited session is ranked on first read; later reads return the
    // same ranking.
    server_.Get(path("/sessions/:id/ranking"),
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  auto slot = find_session(req.path_params.at("id"));
                  std::lock_guard lock(slot->mu);
                  DssSession& s = slot->session;
                  if (s.state == SessionState::kElicited)
                    s = advance_session(s, event::Rank{}, repo_);
                  bool ranked = s.state == SessionState::kRanked ||
                                (s.state == SessionState::kClosed && !s.ranking.empty());
                  if (!ranked)
                    throw Error(ErrorKind::kProtocol,
                                "session in state " + std::string(state_name(s.state)) +
                                    " has no ranking",
                                Json{{"state", state_name(s.state)}, {"event", "rank"}});
                  slot->touched = std::chrono::steady_clock::now();
                  send_json(res, 200, ranking_json(s));
                }));

    server_.Post(path("/sessions/:id/choose"),
                 guarded([this](const httplib::Request& req, httplib::Response& res) {
                   Json body = parse_body(req, /*allow_empty=*/true);
                   std::string model_id;
                   if (auto it = body.find("model_id"); it != body.end() && it->is_string())
                     model_id = it->get<std::string>();
                   DssSession s = apply(req.path_params.at("id"), event::Choose{model_id});
                   send_json(res, 200, session_to_json(s));
                 }));

    server_.Post(path("/sessions/:id/build-new"),
                 mutating([this](const httplib::Request& req, httplib::Response& res) {
                   Json body = parse_body(req, /*allow_empty=*/true);
                   event::BuildNew ev;
                   if (auto it = body.find("max_methods"); it != body.end() && !it->is_null()) {
                     if (!it->is_number_integer())
                       throw Error(ErrorKind::kInvalidInput, "max_methods must be an integer");
                     ev.max_methods = it->get<int>();
                   }
                   DssSession s = apply(req.path_params.at("id"), ev);
                   ModelRecord draft = repo_.get_model(s.outcome->model_id);
                   send_json(res, 201,
                             Json{{"model", record_to_json(draft)},
                                  {"session", session_to_json(s)}});
                 }));

    server_.Post(path("/sessions/:id/abandon"),
                 guarded([this](const httplib::Request& req, httplib::Response& res) {
                   DssSession s = apply(req.path_params.at("id"), event::Abandon{});
                   send_json(res, 200, session_to_json(s));
                 }));
  }

  ServiceConfig config_;
  Repository repo_;
  httplib::Server server_;
  std::thread thread_;
  int bound_port_ = 0;

  std::mutex sessions_mu_;
  std::map<std::string, std::shared_ptr<SessionSlot>> sessions_;
  std::uint64_t session_counter_ = 0;
  std::mt19937_64 rng_{std::random_device{}()};
};

}  // namespace dlom
