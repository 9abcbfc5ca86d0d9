#include "concore/session.hpp"

#include <fmt/format.h>

#include "concore/error.hpp"

namespace concore {

using nlohmann::json;

void EngineConfig::validate() const {
  if (!(theta > 0.0 && theta <= 1.0)) throw ConfigError(fmt::format("theta must be in (0, 1], got {}", theta));
  budget.validate();
}

json engine_config_to_json(const EngineConfig& c) {
  return json{
      {"theta", c.theta},
      {"similarity", std::string(text::to_string(c.similarity))},
      {"packet_budget", c.budget.packet_budget},
      {"summary_budget", c.budget.summary_budget},
      {"shadow_baseline", c.shadow_baseline},
  };
}

namespace {

json topic_to_json(const TopicDecision& d) {
  return json{
      {"kind", std::string(to_string(d.kind))},
      {"target_concept_id", d.target_concept_id ? json(*d.target_concept_id) : json(nullptr)},
      {"score", d.score},
  };
}

}  // namespace

json turn_record_to_json(const TurnRecord& r) {
  return json{
      {"turn_index", r.turn_index},
      {"instruction", r.instruction},
      {"topic_decision", topic_to_json(r.topic_decision)},
      {"operator_id", r.operator_id.str()},
      {"rule_id", r.rule_id},
      {"concept_before", concept_to_json(r.concept_before)},
      {"concept_after", concept_to_json(r.concept_after)},
      {"instruction_update", update_to_json(r.instruction_update)},
      {"response_update", update_to_json(r.response_update)},
      {"packet", packet_to_json(r.packet)},
      {"response", r.response},
      {"core_prompt_tokens", r.core_prompt_tokens},
      {"baseline_prompt_tokens", r.baseline_prompt_tokens ? json(*r.baseline_prompt_tokens) : json(nullptr)},
      {"failed", r.failed},
      {"error", r.error},
  };
}

Engine::Engine(std::shared_ptr<const TurnInterpreter> interpreter, std::shared_ptr<ModelBackend> backend,
               std::shared_ptr<ConceptStore> store, std::shared_ptr<IdSource> ids)
    : interpreter_(std::move(interpreter)), backend_(std::move(backend)), store_(std::move(store)), ids_(std::move(ids)) {
  if (!interpreter_ || !backend_ || !store_ || !ids_) throw ConfigError("engine: missing component");
}

Session Engine::open_session(std::string user_id, const EngineConfig& config) const {
  config.validate();
  if (user_id.empty()) throw ConfigError("user_id must be nonempty");
  Session s;
  s.session_id = ids_->next("s");
  s.user_id = std::move(user_id);
  s.config = config;
  return s;
}

std::vector<LocalConcept> Engine::dormant_concepts(const Session& session) const {
  auto out = store_->dormant_concepts(session.user_id);
  if (session.active_concept) {
    std::erase_if(out, [&](const LocalConcept& lc) { return lc.concept_id == session.active_concept->concept_id; });
  }
  return out;
}

void Engine::park_active(Session& session, Timestamp now) {
  if (!session.active_concept) return;
  store_->upsert(session.user_id, with_status(*session.active_concept, ConceptStatus::dormant, now));
  session.active_concept.reset();
}

void Engine::reactivate(Session& session, const std::string& concept_id, Timestamp now) {
  const auto target = store_->get(session.user_id, concept_id);
  if (!target || target->status != ConceptStatus::dormant ||
      (session.active_concept && session.active_concept->concept_id == concept_id)) {
    throw NotFoundError(fmt::format("no dormant concept {} for user {}", concept_id, session.user_id));
  }
  park_active(session, now);
  LocalConcept lc = with_status(store_->touch(session.user_id, concept_id, now), ConceptStatus::active, now);
  store_->upsert(session.user_id, lc);
  session.active_concept = std::move(lc);
}

TurnRecord Engine::process_turn(Session& session, std::string_view instruction, Timestamp now,
                                const TurnOptions& options) {
  store_->evict_expired(now);

  TurnRecord rec;
  rec.turn_index = session.turn_counter + 1;
  rec.instruction = std::string(instruction);

  // (1) topic
  const auto dormants = dormant_concepts(session);
  const LocalConcept* active = session.active_concept ? &*session.active_concept : nullptr;
  rec.topic_decision =
      interpreter_->classify(instruction, active, dormants, session.config.theta, session.config.similarity);
  switch (rec.topic_decision.kind) {
    case TopicKind::switch_new:
      park_active(session, now);
      session.active_concept = new_concept(std::string(instruction), now, *ids_);
      break;
    case TopicKind::reactivate: {
      park_active(session, now);
      const auto& id = *rec.topic_decision.target_concept_id;
      session.active_concept = with_status(store_->touch(session.user_id, id, now), ConceptStatus::active, now);
      break;
    }
    case TopicKind::continue_topic:
      break;
  }
  rec.concept_before = *session.active_concept;

  // (2) operator
  const Selection sel = interpreter_->select(instruction, rec.concept_before);
  rec.operator_id = sel.op;
  rec.rule_id = sel.rule_id;
  const OperatorSpec& spec = library().get(sel.op);

  // (3) instruction-derived update
  rec.instruction_update = interpreter_->from_instruction(instruction);
  rec.instruction_update.next_operator = sel.op;
  LocalConcept lc = apply_update(rec.concept_before, rec.instruction_update, now);
  session.active_concept = lc;

  // (4) packet
  rec.packet = build_core_packet(spec, lc, instruction, session.config.budget);
  rec.core_prompt_tokens = rec.packet.token_count;

  // (8, computed early) the token-first prompt is the transcript so far plus this instruction
  if (options.shadow_baseline.value_or(session.config.shadow_baseline)) {
    rec.baseline_prompt_tokens = build_baseline_prompt(session.transcript, instruction).token_count;
  }

  // (5) generation
  bool ok = true;
  try {
    rec.response = backend_->generate(rec.packet, GenerationHints{options.response_tokens});
  } catch (const std::exception& e) {
    ok = false;
    rec.failed = true;
    rec.error = e.what();
  }

  if (ok) {
    // (6) response-derived update, (7) transcript
    rec.response_update = interpreter_->from_response(rec.response, spec);
    lc = apply_update(lc, rec.response_update, now);
    session.active_concept = lc;
    session.transcript.push_back({Speaker::user, rec.instruction});
    session.transcript.push_back({Speaker::assistant, rec.response});
  }
  rec.concept_after = lc;

  // (9) persist
  store_->upsert(session.user_id, lc);
  session.token_log.push_back({rec.baseline_prompt_tokens, rec.core_prompt_tokens});
  ++session.turn_counter;
  return rec;
}

}  // namespace concore
