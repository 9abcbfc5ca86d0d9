#include "concore/packet.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "concore/error.hpp"
#include "concore/tokens.hpp"

namespace concore {

void TokenBudget::validate() const {
  if (packet_budget == 0 || summary_budget == 0) throw ConfigError("token budgets must be positive");
  if (summary_budget >= packet_budget) {
    throw ConfigError(fmt::format("summary_budget ({}) must be < packet_budget ({})", summary_budget, packet_budget));
  }
}

namespace {

std::string section_line(std::string_view header, std::string_view body) {
  return fmt::format("[{}] {}\n", header, body.empty() ? std::string_view("(none)") : body);
}

}  // namespace

ConceptPacket build_core_packet(const OperatorSpec& spec, const LocalConcept& lc, std::string_view instruction,
                                const TokenBudget& budget) {
  ConceptPacket p;
  p.operator_id = spec.operator_id;

  const std::string op_line = fmt::format("[OPERATOR] {}: {}\n", spec.operator_id.str(), spec.description);
  std::string rc_block;
  if (spec.reasoning_constraints.empty()) {
    rc_block = "[REASONING CONSTRAINTS] (none)\n";
  } else {
    rc_block = "[REASONING CONSTRAINTS]\n";
    for (const auto& rc : spec.reasoning_constraints) rc_block += fmt::format("- {}\n", rc);
  }
  const std::string tail = section_line("INSTRUCTION", instruction) + section_line("OUTPUT FORMAT", spec.expected_output);

  // The concept summary gets whatever the fixed sections leave, capped by summary_budget.
  const std::size_t fixed = count_tokens(op_line) + count_tokens(rc_block) + count_tokens(tail);
  const std::size_t room = budget.packet_budget > fixed ? budget.packet_budget - fixed : 0;
  const ConceptSummary summary = render_concept_summary(lc, std::min(budget.summary_budget, room));

  p.rendered_text = op_line + rc_block + summary.text + tail;
  p.token_count = count_tokens(p.rendered_text);
  p.over_budget = summary.over_budget || p.token_count > budget.packet_budget;

  p.sections = {
      {"OPERATOR", fmt::format("{}: {}", spec.operator_id.str(), spec.description)},
      {"REASONING_CONSTRAINTS", ""},
      {"TASK", summary.task},
      {"CONSTRAINTS", summary.constraints},
      {"INTERMEDIATE", summary.intermediate},
      {"PENDING", summary.pending},
      {"INSTRUCTION", std::string(instruction)},
      {"OUTPUT_FORMAT", spec.expected_output},
  };
  for (std::size_t i = 0; i < spec.reasoning_constraints.size(); ++i) {
    if (i) p.sections["REASONING_CONSTRAINTS"] += "\n";
    p.sections["REASONING_CONSTRAINTS"] += spec.reasoning_constraints[i];
  }
  p.section_items = {
      {"REASONING_CONSTRAINTS", spec.reasoning_constraints},
      {"CONSTRAINTS", summary.constraint_items},
      {"INTERMEDIATE", summary.intermediate_items},
      {"PENDING", summary.pending_items},
  };
  return p;
}

std::string_view to_string(Speaker s) { return s == Speaker::user ? "user" : "assistant"; }

BaselinePrompt build_baseline_prompt(std::span<const Utterance> transcript, std::string_view instruction) {
  BaselinePrompt out;
  for (const auto& u : transcript) {
    out.text += u.speaker == Speaker::user ? "User: " : "Assistant: ";
    out.text += u.text;
    out.text += '\n';
  }
  out.text += "User: ";
  out.text += instruction;
  out.token_count = count_tokens(out.text);
  return out;
}

nlohmann::json packet_to_json(const ConceptPacket& p) {
  return nlohmann::json{
      {"operator_id", p.operator_id.str()},
      {"rendered_text", p.rendered_text},
      {"token_count", p.token_count},
      {"sections", p.sections},
      {"section_items", p.section_items},
      {"over_budget", p.over_budget},
  };
}

}  // namespace concore
