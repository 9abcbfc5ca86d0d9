#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "concore/backend.hpp"
#include "concore/clock.hpp"
#include "concore/concept.hpp"
#include "concore/concept_store.hpp"
#include "concore/interpreter.hpp"
#include "concore/packet.hpp"
#include "concore/stats.hpp"

namespace concore {

struct EngineConfig {
  double theta = 0.3;
  text::SimilarityMeasure similarity = text::SimilarityMeasure::query_coverage;
  TokenBudget budget;
  bool shadow_baseline = false;

  /// Throws ConfigError.
  void validate() const;
};

nlohmann::json engine_config_to_json(const EngineConfig& config);

struct Session {
  std::string session_id;
  std::string user_id;
  std::optional<LocalConcept> active_concept;
  std::vector<Utterance> transcript;  // audit and shadow baseline only
  std::size_t turn_counter = 0;
  EngineConfig config;
  std::vector<TurnTokens> token_log;
};

struct TurnRecord {
  std::size_t turn_index = 0;  // 1-based
  std::string instruction;
  TopicDecision topic_decision;
  OperatorId operator_id;
  std::string rule_id;
  LocalConcept concept_before;
  LocalConcept concept_after;
  ConceptUpdate instruction_update;
  ConceptUpdate response_update;
  ConceptPacket packet;
  std::string response;
  std::size_t core_prompt_tokens = 0;
  std::optional<std::size_t> baseline_prompt_tokens;
  bool failed = false;
  std::string error;
};

nlohmann::json turn_record_to_json(const TurnRecord& record);

struct TurnOptions {
  std::optional<bool> shadow_baseline;
  std::optional<std::size_t> response_tokens;
};

/// Runs the per-turn loop against a backend and a warm store.
///
/// Turn order: topic decision (dormant/reactivate/new), operator selection,
/// instruction-derived update, packet, generation, response-derived update,
/// transcript, shadow baseline, persistence. One turn at a time per session;
/// the engine itself may serve many sessions concurrently.
class Engine {
 public:
  Engine(std::shared_ptr<const TurnInterpreter> interpreter, std::shared_ptr<ModelBackend> backend,
         std::shared_ptr<ConceptStore> store, std::shared_ptr<IdSource> ids);

  /// Throws ConfigError for an invalid config.
  Session open_session(std::string user_id, const EngineConfig& config) const;

  /// Backend failures do not throw: the record comes back with failed = true,
  /// instruction-derived changes kept and response-derived ones skipped.
  TurnRecord process_turn(Session& session, std::string_view instruction, Timestamp now,
                          const TurnOptions& options = {});

  /// Manual topic switch to a dormant concept. Throws NotFoundError.
  void reactivate(Session& session, const std::string& concept_id, Timestamp now);

  /// Dormant concepts of the session's user, excluding the active one.
  std::vector<LocalConcept> dormant_concepts(const Session& session) const;

  const TurnInterpreter& interpreter() const noexcept { return *interpreter_; }
  const OperatorLibrary& library() const noexcept { return interpreter_->library(); }
  ConceptStore& store() noexcept { return *store_; }

 private:
  void park_active(Session& session, Timestamp now);

  std::shared_ptr<const TurnInterpreter> interpreter_;
  std::shared_ptr<ModelBackend> backend_;
  std::shared_ptr<ConceptStore> store_;
  std::shared_ptr<IdSource> ids_;
};

}  // namespace concore
