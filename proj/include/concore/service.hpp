#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "concore/clock.hpp"
#include "concore/session.hpp"

namespace httplib {
class Server;
}

namespace concore {

struct HttpResult {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";

  nlohmann::json json() const { return nlohmann::json::parse(body); }
};

/// JSON API over the engine. Transport-independent: `dispatch` takes a method,
/// path and body; `bind_routes` wires it into an HTTP server.
///
///   POST /sessions                               create session
///   POST /sessions/{id}/turns                    run one turn
///   GET  /sessions/{id}/state                    active + dormant concepts, stats
///   GET  /sessions/{id}/stats[?source=table1]    per-turn token stats
///   POST /sessions/{id}/reactivate/{concept_id}  manual reactivation
///   GET  /operators                              operator library document
///
/// Concurrent turns on one session get 409.
class Service {
 public:
  Service(std::shared_ptr<Engine> engine, std::shared_ptr<Clock> clock, EngineConfig defaults);

  HttpResult create_session(const nlohmann::json& body);
  HttpResult turn(const std::string& session_id, const nlohmann::json& body);
  HttpResult inspect(const std::string& session_id) const;
  HttpResult stats(const std::string& session_id) const;
  HttpResult reactivate(const std::string& session_id, const std::string& concept_id);
  HttpResult operators() const;

  /// Enables `GET /sessions/{id}/stats?source=table1`, which serves the
  /// replayed reference table instead of the session's own counts.
  void set_reference_replay(std::vector<std::pair<std::size_t, std::size_t>> per_turn);

  HttpResult dispatch(std::string_view method, std::string_view path, std::string_view body);

 private:
  // What readers see: refreshed after every completed turn or reactivation.
  struct Snapshot {
    std::string session_id;
    std::string user_id;
    EngineConfig config;
    std::optional<LocalConcept> active;
    std::vector<LocalConcept> dormants;
    std::vector<TurnTokens> token_log;
    std::size_t turn_counter = 0;
  };
  struct Slot {
    std::mutex mu;  // guards session
    Session session;
    std::atomic<bool> busy{false};
    mutable std::mutex snap_mu;
    Snapshot snapshot;
  };

  std::shared_ptr<Slot> find(const std::string& session_id) const;
  static nlohmann::json state_document(const Snapshot& snap);
  Snapshot snapshot_of(const Session& session) const;
  void publish(Slot& slot) const;

  std::shared_ptr<Engine> engine_;
  std::shared_ptr<Clock> clock_;
  EngineConfig defaults_;
  mutable std::shared_mutex sessions_mu_;
  std::map<std::string, std::shared_ptr<Slot>> sessions_;
  std::vector<std::pair<std::size_t, std::size_t>> reference_replay_;
};

/// Registers the API routes (and an optional static directory) on `server`.
void bind_routes(httplib::Server& server, Service& service);

}  // namespace concore
