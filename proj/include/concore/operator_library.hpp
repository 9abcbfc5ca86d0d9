#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "concore/concept.hpp"
#include "concore/operator_id.hpp"

namespace concore {

enum class OperatorFamily {
  distillation_extraction,
  transformation_rewriting,
  explanatory_reasoning,
  planning_structuring,
  evaluation_verification,
};

inline constexpr std::array<OperatorFamily, 5> kAllFamilies = {
    OperatorFamily::distillation_extraction,  OperatorFamily::transformation_rewriting,
    OperatorFamily::explanatory_reasoning,    OperatorFamily::planning_structuring,
    OperatorFamily::evaluation_verification,
};

std::string_view family_name(OperatorFamily family);
std::optional<OperatorFamily> family_from_name(std::string_view name);

struct OperatorSpec {
  OperatorId operator_id;
  std::optional<OperatorFamily> family;  // required inside a library document
  std::string description;
  std::vector<std::string> input_requirements;
  std::string expected_output;
  std::vector<std::string> reasoning_constraints;
  std::vector<std::string> state_update_rules;

  friend bool operator==(const OperatorSpec&, const OperatorSpec&) = default;
};

struct Violation {
  std::string operator_id;
  std::string field;
  std::string reason;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const noexcept { return violations.empty(); }
};

ValidationReport validate_spec(const OperatorSpec& spec);

struct SatisfactionReport {
  std::vector<std::string> failed;   // predicate source text
  std::vector<std::string> reasons;  // parallel to failed
  bool satisfied() const noexcept { return failed.empty(); }
};

SatisfactionReport check_input_requirements(const OperatorSpec& spec, const LocalConcept& lc);

/// Throws ParseError on missing or mistyped fields.
OperatorSpec spec_from_json(const nlohmann::json& doc);
nlohmann::json spec_to_json(const OperatorSpec& spec);

/// Uppercase, non-alphanumeric runs collapsed to '_', edges trimmed.
/// "Rewrite (Tone)" -> "REWRITE_TONE", "Rank/Score" -> "RANK_SCORE".
std::string normalize_operator_name(std::string_view name);

/// The fixed operator library. Immutable after load.
class OperatorLibrary {
 public:
  static OperatorLibrary load(std::string_view document);
  static OperatorLibrary load_file(const std::filesystem::path& path);

  const OperatorSpec* find(const OperatorId& id) const;
  /// Throws UnknownOperatorError.
  const OperatorSpec& get(const OperatorId& id) const;

  /// Canonical id for an id or alias, case-insensitive on the normalized name.
  OperatorId resolve_alias(std::string_view name) const;

  std::size_t size() const noexcept { return operators_.size(); }
  const std::string& version() const noexcept { return version_; }
  const std::map<OperatorId, OperatorSpec>& operators() const noexcept { return operators_; }
  const std::map<std::string, OperatorId>& aliases() const noexcept { return aliases_; }
  const std::string& document() const noexcept { return document_; }

  std::vector<OperatorId> members(OperatorFamily family) const;

 private:
  OperatorLibrary() = default;

  std::string version_;
  std::map<OperatorId, OperatorSpec> operators_;
  std::map<std::string, OperatorId> aliases_;
  std::string document_;
};

/// Shape check for the shipped library: 40 operators, 5 families of 8.
ValidationReport check_canonical_shape(const OperatorLibrary& library);

}  // namespace concore
