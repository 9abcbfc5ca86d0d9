#include "concore/bench.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "concore/error.hpp"

namespace concore {

using nlohmann::json;

namespace {

std::string need_string(const json& doc, const char* key, const std::string& where) {
  if (!doc.contains(key) || !doc[key].is_string()) throw ParseError(fmt::format("{}: '{}' must be a string", where, key));
  return doc[key].get<std::string>();
}

std::size_t need_count(const json& v, const std::string& where) {
  if (!v.is_number_integer() || v.get<long long>() < 0) throw ParseError(where + ": expected a non-negative integer");
  return v.get<std::size_t>();
}

ScenarioTurn turn_from_json(const json& doc, std::size_t index) {
  const std::string where = fmt::format("scenario turn {}", index);
  if (!doc.is_object()) throw ParseError(where + ": must be an object");
  ScenarioTurn t;
  t.instruction = need_string(doc, "instruction", where);
  if (doc.contains("expected_operator")) t.expected_operator = need_string(doc, "expected_operator", where);
  if (doc.contains("expected_constraints")) {
    const auto& c = doc["expected_constraints"];
    if (!c.is_object()) throw ParseError(where + ": expected_constraints must be an object");
    OrderedMap m;
    for (const auto& [k, v] : c.items()) {
      if (!v.is_string()) throw ParseError(where + ": expected_constraints values must be strings");
      m.upsert(k, v.get<std::string>());
    }
    t.expected_constraints = std::move(m);
  }
  if (doc.contains("expected_intermediate_keys")) {
    const auto& k = doc["expected_intermediate_keys"];
    if (!k.is_array()) throw ParseError(where + ": expected_intermediate_keys must be an array");
    std::vector<std::string> keys;
    for (const auto& s : k) {
      if (!s.is_string()) throw ParseError(where + ": expected_intermediate_keys must hold strings");
      keys.push_back(s.get<std::string>());
    }
    t.expected_intermediate_keys = std::move(keys);
  }
  if (doc.contains("expected_topic")) t.expected_topic = topic_kind_from_string(need_string(doc, "expected_topic", where));
  if (doc.contains("sentinel")) t.sentinel = need_string(doc, "sentinel", where);
  return t;
}

}  // namespace

Scenario scenario_from_json(const json& doc) {
  if (!doc.is_object()) throw ParseError("scenario: document must be an object");
  Scenario s;
  s.name = need_string(doc, "name", "scenario");
  if (doc.contains("user_id")) s.user_id = need_string(doc, "user_id", "scenario");

  if (doc.contains("per_turn")) {
    const auto& pt = doc["per_turn"];
    if (!pt.is_array()) throw ParseError("scenario: per_turn must be an array of [baseline, core] pairs");
    for (const auto& pair : pt) {
      if (!pair.is_array() || pair.size() != 2) throw ParseError("scenario: per_turn entries must be [baseline, core]");
      s.per_turn.emplace_back(need_count(pair[0], "scenario per_turn"), need_count(pair[1], "scenario per_turn"));
    }
  }
  if (doc.contains("turns")) {
    const auto& turns = doc["turns"];
    if (!turns.is_array()) throw ParseError("scenario: turns must be an array");
    for (std::size_t i = 0; i < turns.size(); ++i) s.turns.push_back(turn_from_json(turns[i], i + 1));
  }
  if (s.is_replay() == !s.turns.empty()) {
    throw ParseError("scenario: exactly one of a nonempty 'turns' or 'per_turn' is required");
  }

  if (doc.contains("response_profile")) {
    const auto& p = doc["response_profile"];
    if (!p.is_array()) throw ParseError("scenario: response_profile must be an array");
    for (const auto& v : p) s.response_profile.push_back(need_count(v, "scenario response_profile"));
    if (!s.response_profile.empty() && s.response_profile.size() != s.turns.size()) {
      throw ParseError(fmt::format("scenario: response_profile has {} entries for {} turns", s.response_profile.size(),
                                   s.turns.size()));
    }
  }
  if (doc.contains("mock_templates")) {
    if (!doc["mock_templates"].is_object()) throw ParseError("scenario: mock_templates must be an object");
    s.mock_templates = doc["mock_templates"];
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open scenario {}", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return scenario_from_json(json::parse(ss.str()));
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

namespace {

void check_expectations(const ScenarioTurn& t, const TurnRecord& r, const OperatorLibrary& library) {
  if (t.expected_operator) {
    const OperatorId want = library.resolve_alias(*t.expected_operator);
    if (want != r.operator_id) {
      throw ExpectationMismatch(r.turn_index, "operator",
                                fmt::format("expected {}, got {} (rule {})", want.str(), r.operator_id.str(), r.rule_id));
    }
  }
  if (t.expected_topic && *t.expected_topic != r.topic_decision.kind) {
    throw ExpectationMismatch(r.turn_index, "topic",
                              fmt::format("expected {}, got {}", to_string(*t.expected_topic),
                                          to_string(r.topic_decision.kind)));
  }
  if (t.expected_constraints) {
    for (const auto& [k, v] : *t.expected_constraints) {
      const std::string* got = r.concept_after.constraints.find(k);
      if (got == nullptr || *got != v) {
        throw ExpectationMismatch(r.turn_index, "constraints",
                                  fmt::format("expected {}={}, got {}", k, v, got ? *got : std::string("(absent)")));
      }
    }
  }
  if (t.expected_intermediate_keys) {
    for (const auto& k : *t.expected_intermediate_keys) {
      if (!r.concept_after.intermediate_results.contains(k)) {
        throw ExpectationMismatch(r.turn_index, "intermediate_results", fmt::format("missing key {}", k));
      }
    }
  }
}

}  // namespace

ScenarioRun run_scenario(const Scenario& scenario, const BenchContext& ctx, std::shared_ptr<ModelBackend> backend) {
  ScenarioRun run;
  if (scenario.is_replay()) {
    run.stats = replay_table1(scenario.per_turn);
    return run;
  }
  if (!ctx.interpreter) throw ConfigError("bench: no interpreter");
  if (!backend) backend = std::make_shared<MockBackend>(ctx.templates.with_overrides(scenario.mock_templates));

  LogicalClock clock(default_epoch());
  auto ids = std::make_shared<IdSource>(ctx.seed);
  auto store = std::make_shared<ConceptStore>();
  Engine engine(ctx.interpreter, backend, store, ids);

  EngineConfig config = ctx.config;
  config.shadow_baseline = true;
  Session session = engine.open_session(scenario.user_id, config);

  for (std::size_t i = 0; i < scenario.turns.size(); ++i) {
    const auto& t = scenario.turns[i];
    TurnOptions opts;
    if (!scenario.response_profile.empty()) opts.response_tokens = scenario.response_profile[i];
    TurnRecord rec = engine.process_turn(session, t.instruction, clock.now(), opts);
    if (rec.failed) throw BackendError(fmt::format("turn {}: {}", rec.turn_index, rec.error));
    check_expectations(t, rec, engine.library());
    run.records.push_back(std::move(rec));
  }
  run.stats = compute_token_stats(session.token_log);
  return run;
}

std::string records_to_jsonl(const std::vector<TurnRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += turn_record_to_json(r).dump();
    out += '\n';
  }
  return out;
}

}  // namespace concore
