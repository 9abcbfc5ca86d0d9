#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "concore/backend.hpp"
#include "concore/interpreter.hpp"
#include "concore/session.hpp"
#include "concore/stats.hpp"

namespace concore {

struct ScenarioTurn {
  std::string instruction;
  std::optional<std::string> expected_operator;
  std::optional<OrderedMap> expected_constraints;
  std::optional<std::vector<std::string>> expected_intermediate_keys;
  std::optional<TopicKind> expected_topic;
  std::optional<std::string> sentinel;  // text that must never reach a later packet
};

struct Scenario {
  std::string name;
  std::string user_id = "bench-user";
  std::vector<ScenarioTurn> turns;
  std::vector<std::size_t> response_profile;  // per-turn mock response token targets
  nlohmann::json mock_templates = nlohmann::json::object();

  /// Table-1 style replay input; when set, `turns` is empty.
  std::vector<std::pair<std::size_t, std::size_t>> per_turn;
  bool is_replay() const noexcept { return !per_turn.empty(); }
};

/// Throws ParseError.
Scenario scenario_from_json(const nlohmann::json& doc);
Scenario load_scenario(const std::filesystem::path& path);

struct BenchContext {
  std::shared_ptr<const TurnInterpreter> interpreter;
  MockTemplates templates;
  EngineConfig config;
  std::uint64_t seed = 42;
};

struct ScenarioRun {
  TokenStats stats;
  std::vector<TurnRecord> records;
};

/// Runs every turn through a fresh engine (mock backend unless `backend` is
/// given, in-memory store, logical clock, seeded ids, shadow baseline on) and
/// checks per-turn expectations. Throws ExpectationMismatch.
ScenarioRun run_scenario(const Scenario& scenario, const BenchContext& context,
                         std::shared_ptr<ModelBackend> backend = nullptr);

/// JSON-lines, one TurnRecord per line.
std::string records_to_jsonl(const std::vector<TurnRecord>& records);

}  // namespace concore
