#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "concore/concept.hpp"
#include "concore/operator_library.hpp"

namespace concore {

struct TokenBudget {
  std::size_t packet_budget = 256;
  std::size_t summary_budget = 160;

  /// Throws ConfigError unless 0 < summary_budget < packet_budget.
  void validate() const;
};

/// Section keys in rendering order.
inline constexpr std::array<std::string_view, 8> kPacketSections = {
    "OPERATOR", "REASONING_CONSTRAINTS", "TASK",        "CONSTRAINTS",
    "INTERMEDIATE", "PENDING",           "INSTRUCTION", "OUTPUT_FORMAT",
};

/// The per-turn model input. `sections` holds raw section content (empty when
/// the section has nothing to say); `rendered_text` is the full template.
struct ConceptPacket {
  OperatorId operator_id;
  std::string rendered_text;
  std::size_t token_count = 0;
  std::map<std::string, std::string> sections;
  std::map<std::string, std::vector<std::string>> section_items;
  bool over_budget = false;
};

ConceptPacket build_core_packet(const OperatorSpec& spec, const LocalConcept& lc,
                                std::string_view instruction, const TokenBudget& budget);

enum class Speaker { user, assistant };

std::string_view to_string(Speaker s);

struct Utterance {
  Speaker speaker;
  std::string text;

  friend bool operator==(const Utterance&, const Utterance&) = default;
};

struct BaselinePrompt {
  std::string text;
  std::size_t token_count = 0;
};

/// Token-first prompt: the whole transcript replayed, then the new instruction.
BaselinePrompt build_baseline_prompt(std::span<const Utterance> transcript,
                                     std::string_view instruction);

nlohmann::json packet_to_json(const ConceptPacket& packet);

}  // namespace concore
