#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "concore/concept.hpp"
#include "concore/operator_library.hpp"
#include "concore/predicate.hpp"
#include "concore/text.hpp"

namespace concore {

/// Matches when any keyword phrase occurs (if keywords are given) and the
/// instruction starts with `phrase` (if given).
struct Trigger {
  std::vector<std::string> keywords;
  std::optional<std::string> phrase;
};

struct SelectionRule {
  std::string rule_id;
  int priority = 0;  // lower fires first
  Trigger trigger;
  std::optional<Predicate> guard;
  OperatorId op;
};

struct Selection {
  OperatorId op;
  std::string rule_id;

  friend bool operator==(const Selection&, const Selection&) = default;
};

inline constexpr std::string_view kDefaultRuleId = "default";

/// Parses and validates a ruleset: unique priorities, operators resolvable in
/// `library` (aliases resolved to canonical ids), guards parse.
std::vector<SelectionRule> load_ruleset(const nlohmann::json& doc, const OperatorLibrary& library);
std::vector<SelectionRule> load_ruleset_file(const std::filesystem::path& path,
                                             const OperatorLibrary& library);

bool trigger_matches(const Trigger& trigger, std::string_view instruction);
bool is_interrogative(std::string_view instruction);

Selection select_operator(std::string_view instruction, const LocalConcept& lc,
                          std::span<const SelectionRule> ruleset, const OperatorLibrary& library);

enum class TopicKind { continue_topic, switch_new, reactivate };

std::string_view to_string(TopicKind k);
TopicKind topic_kind_from_string(std::string_view s);

struct TopicDecision {
  TopicKind kind = TopicKind::switch_new;
  std::optional<std::string> target_concept_id;  // reactivate only
  double score = 0.0;

  friend bool operator==(const TopicDecision&, const TopicDecision&) = default;
};

struct TopicPolicy {
  double theta = 0.3;
  text::SimilarityMeasure measure = text::SimilarityMeasure::query_coverage;
  std::vector<std::string> switch_markers = default_switch_markers();

  static std::vector<std::string> default_switch_markers();
};

TopicDecision classify_topic(std::string_view instruction, const LocalConcept* active,
                             std::span<const LocalConcept> dormants, const TopicPolicy& policy);

struct ExtractionLexicon {
  struct ConstraintEntry {
    std::string phrase;  // normalized surface phrase
    std::string key;
    std::string value;
  };

  std::vector<ConstraintEntry> constraint_map;
  std::vector<std::string> question_markers;
  std::string list_item_pattern = R"(^\s*(?:[-*+]|\d+[.)])\s+(.*\S)\s*$)";
  std::vector<std::string> switch_markers;

  /// Throws ParseError on duplicate phrases or a bad list pattern.
  static ExtractionLexicon from_json(const nlohmann::json& doc);
  static ExtractionLexicon load_file(const std::filesystem::path& path);

  const std::regex& list_item_regex() const;

 private:
  std::shared_ptr<const std::regex> compiled_;
};

ConceptUpdate extract_from_instruction(std::string_view instruction, const ExtractionLexicon& lexicon);
ConceptUpdate extract_from_response(std::string_view response, const OperatorSpec& spec,
                                    const ExtractionLexicon& lexicon);

/// Bundles the rule-based front half of a turn: topic, operator, extraction.
class TurnInterpreter {
 public:
  TurnInterpreter(std::shared_ptr<const OperatorLibrary> library, std::vector<SelectionRule> rules,
                  ExtractionLexicon lexicon);

  const OperatorLibrary& library() const noexcept { return *library_; }
  const std::vector<SelectionRule>& rules() const noexcept { return rules_; }
  const ExtractionLexicon& lexicon() const noexcept { return lexicon_; }

  Selection select(std::string_view instruction, const LocalConcept& lc) const;
  TopicDecision classify(std::string_view instruction, const LocalConcept* active,
                         std::span<const LocalConcept> dormants, double theta,
                         text::SimilarityMeasure measure) const;
  ConceptUpdate from_instruction(std::string_view instruction) const;
  ConceptUpdate from_response(std::string_view response, const OperatorSpec& spec) const;

 private:
  std::shared_ptr<const OperatorLibrary> library_;
  std::vector<SelectionRule> rules_;
  ExtractionLexicon lexicon_;
};

}  // namespace concore
