#include "concore/service.hpp"

#include <fmt/format.h>

#include "concore/error.hpp"

namespace concore {

using nlohmann::json;

namespace {

HttpResult reply(int status, const json& body) { return {status, body.dump()}; }
HttpResult fail(int status, std::string_view message) { return reply(status, json{{"error", message}}); }

json stats_document(const TokenStats& stats, bool shadow) {
  json doc = json::parse(write_report(stats, ReportFormat::json));
  doc["shadow_baseline"] = shadow;
  return doc;
}

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> parts;
  std::size_t i = 0;
  while (i < path.size()) {
    while (i < path.size() && path[i] == '/') ++i;
    std::size_t j = i;
    while (j < path.size() && path[j] != '/') ++j;
    if (j > i) parts.emplace_back(path.substr(i, j - i));
    i = j;
  }
  return parts;
}

std::string query_param(std::string_view query, std::string_view key) {
  std::size_t pos = 0;
  while (pos <= query.size()) {
    std::size_t amp = query.find('&', pos);
    if (amp == std::string_view::npos) amp = query.size();
    const auto pair = query.substr(pos, amp - pos);
    const auto eq = pair.find('=');
    if (pair.substr(0, eq) == key) return eq == std::string_view::npos ? "" : std::string(pair.substr(eq + 1));
    pos = amp + 1;
  }
  return {};
}

// Marks a session busy for the lifetime of one mutating request.
class BusyGuard {
 public:
  explicit BusyGuard(std::atomic<bool>& flag) : flag_(flag), owned_(!flag.exchange(true)) {}
  ~BusyGuard() {
    if (owned_) flag_.store(false);
  }
  bool owned() const noexcept { return owned_; }

 private:
  std::atomic<bool>& flag_;
  bool owned_;
};

}  // namespace

Service::Service(std::shared_ptr<Engine> engine, std::shared_ptr<Clock> clock, EngineConfig defaults)
    : engine_(std::move(engine)), clock_(std::move(clock)), defaults_(defaults) {
  if (!engine_ || !clock_) throw ConfigError("service: engine and clock required");
  defaults_.validate();
}

void Service::set_reference_replay(std::vector<std::pair<std::size_t, std::size_t>> per_turn) {
  reference_replay_ = std::move(per_turn);
}

std::shared_ptr<Service::Slot> Service::find(const std::string& session_id) const {
  std::shared_lock lock(sessions_mu_);
  auto it = sessions_.find(session_id);
  return it == sessions_.end() ? nullptr : it->second;
}

Service::Snapshot Service::snapshot_of(const Session& s) const {
  return Snapshot{s.session_id, s.user_id,     s.config,        s.active_concept,
                  engine_->dormant_concepts(s), s.token_log, s.turn_counter};
}

void Service::publish(Slot& slot) const {
  Snapshot snap = snapshot_of(slot.session);
  std::lock_guard lock(slot.snap_mu);
  slot.snapshot = std::move(snap);
}

json Service::state_document(const Snapshot& snap) {
  json dormants = json::array();
  for (const auto& lc : snap.dormants) dormants.push_back(concept_to_json(lc));
  json history = json::array();
  if (snap.active) {
    for (const auto& op : snap.active->operator_history) history.push_back(op.str());
  }
  return json{
      {"session_id", snap.session_id},
      {"user_id", snap.user_id},
      {"turn_counter", snap.turn_counter},
      {"config", engine_config_to_json(snap.config)},
      {"active_concept", snap.active ? concept_to_json(*snap.active) : json(nullptr)},
      {"dormant_concepts", dormants},
      {"operator_history", history},
      {"stats", stats_document(compute_token_stats(snap.token_log), snap.config.shadow_baseline)},
  };
}

HttpResult Service::create_session(const json& body) {
  if (!body.is_object()) return fail(400, "body must be a JSON object");
  if (!body.contains("user_id") || !body["user_id"].is_string() || body["user_id"].get<std::string>().empty()) {
    return fail(400, "user_id (nonempty string) is required");
  }
  EngineConfig config = defaults_;
  try {
    const json overrides = body.contains("config") ? body["config"] : json::object();
    if (!overrides.is_object()) return fail(400, "config must be an object");
    if (overrides.contains("theta")) config.theta = overrides.at("theta").get<double>();
    if (overrides.contains("packet_budget")) config.budget.packet_budget = overrides.at("packet_budget").get<std::size_t>();
    if (overrides.contains("summary_budget")) {
      config.budget.summary_budget = overrides.at("summary_budget").get<std::size_t>();
    }
    if (overrides.contains("shadow_baseline")) config.shadow_baseline = overrides.at("shadow_baseline").get<bool>();
    if (overrides.contains("similarity")) {
      config.similarity = text::similarity_from_string(overrides.at("similarity").get<std::string>());
    }
    for (const char* key : {"packet_budget", "summary_budget"}) {
      if (overrides.contains(key) && overrides[key].is_number_integer() && overrides[key].get<long long>() <= 0) {
        return fail(400, fmt::format("{} must be positive", key));
      }
    }
  } catch (const json::exception& e) {
    return fail(400, fmt::format("bad config: {}", e.what()));
  } catch (const Error& e) {
    return fail(400, e.what());
  }

  Session session;
  try {
    session = engine_->open_session(body["user_id"].get<std::string>(), config);
  } catch (const ConfigError& e) {
    return fail(400, e.what());
  }
  auto slot = std::make_shared<Slot>();
  slot->session = std::move(session);
  publish(*slot);
  const json out = {
      {"session_id", slot->session.session_id},
      {"user_id", slot->session.user_id},
      {"config", engine_config_to_json(slot->session.config)},
  };
  {
    std::unique_lock lock(sessions_mu_);
    sessions_[slot->session.session_id] = slot;
  }
  return reply(201, out);
}

HttpResult Service::turn(const std::string& session_id, const json& body) {
  auto slot = find(session_id);
  if (!slot) return fail(404, fmt::format("unknown session {}", session_id));
  if (!body.is_object() || !body.contains("instruction") || !body["instruction"].is_string()) {
    return fail(400, "instruction (string) is required");
  }
  const std::string instruction = body["instruction"].get<std::string>();
  if (text::trim(instruction).empty()) return fail(400, "instruction must be nonempty");
  TurnOptions options;
  if (body.contains("options") && !body["options"].is_null()) {
    const auto& o = body["options"];
    if (!o.is_object()) return fail(400, "options must be an object");
    if (o.contains("shadow_baseline")) {
      if (!o["shadow_baseline"].is_boolean()) return fail(400, "options.shadow_baseline must be a boolean");
      options.shadow_baseline = o["shadow_baseline"].get<bool>();
    }
  }

  BusyGuard busy(slot->busy);
  if (!busy.owned()) return fail(409, "a turn is already in flight for this session");

  std::lock_guard lock(slot->mu);
  TurnRecord rec;
  try {
    rec = engine_->process_turn(slot->session, instruction, clock_->now(), options);
  } catch (const Error& e) {
    publish(*slot);
    return fail(500, e.what());
  }
  publish(*slot);

  const auto stats = compute_token_stats(slot->session.token_log);
  json out = {
      {"turn_index", rec.turn_index},
      {"response_text", rec.response},
      {"operator_id", rec.operator_id.str()},
      {"rule_id", rec.rule_id},
      {"topic_decision",
       {{"kind", std::string(to_string(rec.topic_decision.kind))},
        {"target_concept_id",
         rec.topic_decision.target_concept_id ? json(*rec.topic_decision.target_concept_id) : json(nullptr)},
        {"score", rec.topic_decision.score}}},
      {"concept_after", concept_to_json(rec.concept_after)},
      {"token_stats_row", token_row_to_json(stats.rows.back())},
      {"packet", packet_to_json(rec.packet)},
      {"failed", rec.failed},
  };
  if (rec.failed) {
    out["error"] = rec.error;
    return reply(502, out);
  }
  return reply(200, out);
}

HttpResult Service::inspect(const std::string& session_id) const {
  auto slot = find(session_id);
  if (!slot) return fail(404, fmt::format("unknown session {}", session_id));
  std::lock_guard lock(slot->snap_mu);
  return reply(200, state_document(slot->snapshot));
}

HttpResult Service::stats(const std::string& session_id) const {
  auto slot = find(session_id);
  if (!slot) return fail(404, fmt::format("unknown session {}", session_id));
  std::lock_guard lock(slot->snap_mu);
  return reply(200, stats_document(compute_token_stats(slot->snapshot.token_log), slot->snapshot.config.shadow_baseline));
}

HttpResult Service::reactivate(const std::string& session_id, const std::string& concept_id) {
  auto slot = find(session_id);
  if (!slot) return fail(404, fmt::format("unknown session {}", session_id));
  BusyGuard busy(slot->busy);
  if (!busy.owned()) return fail(409, "a turn is already in flight for this session");
  std::lock_guard lock(slot->mu);
  try {
    engine_->reactivate(slot->session, concept_id, clock_->now());
  } catch (const NotFoundError& e) {
    return fail(404, e.what());
  }
  publish(*slot);
  std::lock_guard snap_lock(slot->snap_mu);
  return reply(200, state_document(slot->snapshot));
}

HttpResult Service::operators() const { return {200, engine_->library().document()}; }

HttpResult Service::dispatch(std::string_view method, std::string_view target, std::string_view body) {
  std::string_view path = target;
  std::string_view query;
  if (const auto q = target.find('?'); q != std::string_view::npos) {
    path = target.substr(0, q);
    query = target.substr(q + 1);
  }
  const auto parts = split_path(path);

  auto parse_body = [&](json& out) {
    if (body.empty()) {
      out = json::object();
      return true;
    }
    try {
      out = json::parse(body);
      return true;
    } catch (const json::parse_error&) {
      return false;
    }
  };
  auto method_is = [&](std::string_view m) { return method == m; };

  if (parts.size() == 1 && parts[0] == "operators") {
    return method_is("GET") ? operators() : fail(405, "method not allowed");
  }
  if (parts.empty() || parts[0] != "sessions") return fail(404, "no such route");

  if (parts.size() == 1) {
    if (!method_is("POST")) return fail(405, "method not allowed");
    json doc;
    if (!parse_body(doc)) return fail(400, "malformed JSON body");
    return create_session(doc);
  }
  const std::string& id = parts[1];
  if (parts.size() == 3 && parts[2] == "turns") {
    if (!method_is("POST")) return fail(405, "method not allowed");
    json doc;
    if (!parse_body(doc)) return fail(400, "malformed JSON body");
    return turn(id, doc);
  }
  if (parts.size() == 3 && parts[2] == "state") {
    return method_is("GET") ? inspect(id) : fail(405, "method not allowed");
  }
  if (parts.size() == 3 && parts[2] == "stats") {
    if (!method_is("GET")) return fail(405, "method not allowed");
    const std::string source = query_param(query, "source");
    if (source.empty() || source == "session") return stats(id);
    if (source != "table1") return fail(400, fmt::format("unknown stats source '{}'", source));
    if (!find(id)) return fail(404, fmt::format("unknown session {}", id));
    if (reference_replay_.empty()) return fail(404, "no reference replay loaded");
    return reply(200, stats_document(replay_table1(reference_replay_), true));
  }
  if (parts.size() == 4 && parts[2] == "reactivate") {
    return method_is("POST") ? reactivate(id, parts[3]) : fail(405, "method not allowed");
  }
  return fail(404, "no such route");
}

}  // namespace concore
