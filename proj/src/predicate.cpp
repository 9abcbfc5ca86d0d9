#include "concore/predicate.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include <fmt/format.h>

#include "concore/text.hpp"
#include "concore/tokens.hpp"

namespace concore {

namespace {

constexpr std::pair<std::string_view, ConceptField> kFields[] = {
    {"constraints", ConceptField::constraints},
    {"intermediate_results", ConceptField::intermediate_results},
    {"pending_questions", ConceptField::pending_questions},
    {"resolved_questions", ConceptField::resolved_questions},
    {"task_summary", ConceptField::task_summary},
};

class Cursor {
 public:
  explicit Cursor(std::string_view src) : src_(src) {}

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool done() {
    skip_ws();
    return pos_ >= src_.size();
  }

  bool consume(std::string_view lit) {
    skip_ws();
    if (src_.substr(pos_).starts_with(lit)) {
      pos_ += lit.size();
      return true;
    }
    return false;
  }

  /// Consumes a whole word (case-insensitive), not a prefix of a longer word.
  bool consume_word(std::string_view word) {
    skip_ws();
    const auto rest = src_.substr(pos_);
    if (rest.size() < word.size()) return false;
    for (std::size_t i = 0; i < word.size(); ++i) {
      if (std::tolower(static_cast<unsigned char>(rest[i])) != word[i]) return false;
    }
    if (rest.size() > word.size() && (std::isalnum(static_cast<unsigned char>(rest[word.size()])) ||
                                      rest[word.size()] == '_')) {
      return false;
    }
    pos_ += word.size();
    return true;
  }

  void expect(std::string_view lit) {
    if (!consume(lit)) fail(fmt::format("expected '{}'", lit));
  }

  std::string identifier() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
      ++pos_;
    }
    if (start == pos_) fail("expected field name");
    return std::string(src_.substr(start, pos_ - start));
  }

  ConceptField field() {
    const std::size_t start = pos_;
    const std::string name = identifier();
    if (auto f = field_from_name(name)) return *f;
    pos_ = start;
    fail(fmt::format("unknown field '{}'", name));
  }

  Comparison comparison() {
    skip_ws();
    // Two-character operators first.
    if (consume(">=")) return Comparison::ge;
    if (consume("<=")) return Comparison::le;
    if (consume("==")) return Comparison::eq;
    if (consume(">")) return Comparison::gt;
    if (consume("<")) return Comparison::lt;
    fail("expected comparison operator");
  }

  std::int64_t integer() {
    skip_ws();
    std::int64_t value = 0;
    const auto* first = src_.data() + pos_;
    const auto* last = src_.data() + src_.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr == first || value < 0) fail("expected non-negative integer");
    pos_ += static_cast<std::size_t>(ptr - first);
    return value;
  }

  std::string quoted() {
    skip_ws();
    if (pos_ >= src_.size() || src_[pos_] != '"') fail("expected quoted string");
    ++pos_;
    std::string out;
    while (pos_ < src_.size() && src_[pos_] != '"') {
      if (src_[pos_] == '\\' && pos_ + 1 < src_.size()) ++pos_;
      out.push_back(src_[pos_++]);
    }
    if (pos_ >= src_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw PredicateError(fmt::format("predicate '{}': {} at offset {}", src_, what, pos_));
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;
};

bool compare(std::int64_t lhs, Comparison cmp, std::int64_t rhs) {
  switch (cmp) {
    case Comparison::ge: return lhs >= rhs;
    case Comparison::le: return lhs <= rhs;
    case Comparison::eq: return lhs == rhs;
    case Comparison::gt: return lhs > rhs;
    case Comparison::lt: return lhs < rhs;
  }
  return false;
}

std::int64_t field_count(ConceptField field, const LocalConcept& lc) {
  switch (field) {
    case ConceptField::constraints: return static_cast<std::int64_t>(lc.constraints.size());
    case ConceptField::intermediate_results: return static_cast<std::int64_t>(lc.intermediate_results.size());
    case ConceptField::pending_questions: return static_cast<std::int64_t>(lc.pending_questions.size());
    case ConceptField::resolved_questions: return static_cast<std::int64_t>(lc.resolved_questions.size());
    case ConceptField::task_summary: return static_cast<std::int64_t>(count_tokens(lc.task_summary));
  }
  return 0;
}

bool map_contains(const OrderedMap& map, const std::string& needle) {
  return std::any_of(map.begin(), map.end(),
                     [&](const auto& e) { return e.first == needle || e.second == needle; });
}

bool list_contains(const std::vector<std::string>& list, const std::string& needle) {
  return std::find(list.begin(), list.end(), needle) != list.end();
}

}  // namespace

std::optional<ConceptField> field_from_name(std::string_view name) {
  for (const auto& [n, f] : kFields) {
    if (n == name) return f;
  }
  return std::nullopt;
}

std::string_view field_name(ConceptField field) {
  for (const auto& [n, f] : kFields) {
    if (f == field) return n;
  }
  return "?";
}

std::string_view to_string(Comparison cmp) {
  switch (cmp) {
    case Comparison::ge: return ">=";
    case Comparison::le: return "<=";
    case Comparison::eq: return "==";
    case Comparison::gt: return ">";
    case Comparison::lt: return "<";
  }
  return "?";
}

std::string Predicate::canonical() const {
  switch (kind) {
    case Kind::count: return fmt::format("count({}) {} {}", field_name(field), to_string(cmp), literal);
    case Kind::nonempty: return fmt::format("nonempty({})", field_name(field));
    case Kind::contains: return fmt::format("contains({}, \"{}\")", field_name(field), needle);
  }
  return {};
}

Predicate parse_predicate(std::string_view source) {
  Predicate p;
  p.source = text::trim(source);
  Cursor cur(p.source);
  if (cur.done()) cur.fail("empty predicate");

  if (cur.consume("count(")) {
    p.kind = Predicate::Kind::count;
    p.field = cur.field();
    cur.expect(")");
    p.cmp = cur.comparison();
    p.literal = cur.integer();
  } else if (cur.consume("nonempty(")) {
    p.kind = Predicate::Kind::nonempty;
    p.field = cur.field();
    cur.expect(")");
  } else if (cur.consume("contains(")) {
    p.kind = Predicate::Kind::contains;
    p.field = cur.field();
    cur.expect(",");
    p.needle = cur.quoted();
    cur.expect(")");
  } else {
    // Prose sugar: "<field> must contain >= 2 items" / "<field> must be nonempty".
    p.field = cur.field();
    if (!cur.consume_word("must")) cur.fail("expected 'must'");
    if (cur.consume_word("contain")) {
      p.kind = Predicate::Kind::count;
      p.cmp = cur.comparison();
      p.literal = cur.integer();
      if (!cur.consume_word("items")) cur.consume_word("item");
    } else if (cur.consume_word("be") && cur.consume_word("nonempty")) {
      p.kind = Predicate::Kind::nonempty;
    } else {
      cur.fail("expected 'contain' or 'be nonempty'");
    }
  }
  if (!cur.done()) cur.fail("trailing input");
  return p;
}

bool evaluate(const Predicate& predicate, const LocalConcept& lc) {
  switch (predicate.kind) {
    case Predicate::Kind::count:
      return compare(field_count(predicate.field, lc), predicate.cmp, predicate.literal);
    case Predicate::Kind::nonempty:
      if (predicate.field == ConceptField::task_summary) return !text::trim(lc.task_summary).empty();
      return field_count(predicate.field, lc) > 0;
    case Predicate::Kind::contains:
      switch (predicate.field) {
        case ConceptField::constraints: return map_contains(lc.constraints, predicate.needle);
        case ConceptField::intermediate_results: return map_contains(lc.intermediate_results, predicate.needle);
        case ConceptField::pending_questions: return list_contains(lc.pending_questions, predicate.needle);
        case ConceptField::resolved_questions: return list_contains(lc.resolved_questions, predicate.needle);
        case ConceptField::task_summary:
          return text::to_lower(lc.task_summary).find(text::to_lower(predicate.needle)) != std::string::npos;
      }
  }
  return false;
}

}  // namespace concore
