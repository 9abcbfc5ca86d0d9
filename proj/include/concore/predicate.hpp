#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "concore/concept.hpp"
#include "concore/error.hpp"

namespace concore {

// Input-requirement mini-language:
//
//   pred  := "count(" field ")" cmp integer
//          | "nonempty(" field ")"
//          | "contains(" field "," string ")"
//          | field "must contain" cmp integer ["item" | "items"]
//          | field "must be nonempty"
//   cmp   := ">=" | "<=" | "==" | ">" | "<"
//   field := constraints | intermediate_results | pending_questions
//          | resolved_questions | task_summary

enum class ConceptField {
  constraints,
  intermediate_results,
  pending_questions,
  resolved_questions,
  task_summary,
};

std::optional<ConceptField> field_from_name(std::string_view name);
std::string_view field_name(ConceptField field);

enum class Comparison { ge, le, eq, gt, lt };

std::string_view to_string(Comparison cmp);

class PredicateError : public ParseError {
 public:
  using ParseError::ParseError;
};

struct Predicate {
  enum class Kind { count, nonempty, contains };

  Kind kind = Kind::count;
  ConceptField field = ConceptField::constraints;
  Comparison cmp = Comparison::ge;
  std::int64_t literal = 0;
  std::string needle;  // contains() only
  std::string source;  // text as written

  /// Canonical form, e.g. "count(intermediate_results) >= 2".
  std::string canonical() const;
};

/// Throws PredicateError naming the offending token or field.
Predicate parse_predicate(std::string_view source);

/// count(): entries for maps/lists, whitespace tokens for task_summary.
/// contains(): key or value match for maps, element match for lists,
/// case-insensitive substring for task_summary.
bool evaluate(const Predicate& predicate, const LocalConcept& lc);

}  // namespace concore
