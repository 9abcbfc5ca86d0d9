#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "concore/clock.hpp"
#include "concore/operator_id.hpp"

namespace concore {

/// Insertion-ordered string map with unique keys.
class OrderedMap {
 public:
  using Entry = std::pair<std::string, std::string>;

  OrderedMap() = default;
  OrderedMap(std::initializer_list<Entry> entries);

  /// Replaces the value in place when the key exists, otherwise appends.
  void upsert(std::string key, std::string value);
  bool erase(std::string_view key);
  const std::string* find(std::string_view key) const;
  bool contains(std::string_view key) const { return find(key) != nullptr; }

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  auto begin() const noexcept { return entries_.begin(); }
  auto end() const noexcept { return entries_.end(); }
  const std::vector<Entry>& entries() const noexcept { return entries_; }

  friend bool operator==(const OrderedMap&, const OrderedMap&) = default;

 private:
  std::vector<Entry> entries_;
};

enum class ConceptStatus { active, dormant };

std::string_view to_string(ConceptStatus s);

/// Persistent per-topic semantic state. Treated as an immutable value: every
/// update produces a new LocalConcept.
struct LocalConcept {
  std::string concept_id;
  std::string task_summary;
  OrderedMap constraints;
  OrderedMap intermediate_results;
  std::vector<std::string> resolved_questions;
  std::vector<std::string> pending_questions;
  std::optional<OperatorId> active_operator;
  std::vector<OperatorId> operator_history;
  ConceptStatus status = ConceptStatus::active;
  std::set<std::string> topic_keywords;
  Timestamp last_updated{};

  friend bool operator==(const LocalConcept&, const LocalConcept&) = default;
};

struct ConceptUpdate {
  std::optional<std::string> summary_revision;
  OrderedMap add_constraints;
  std::vector<std::string> remove_constraints;
  OrderedMap set_intermediate;
  std::vector<std::string> add_pending;
  std::vector<std::string> resolve;  // pending -> resolved
  std::optional<OperatorId> next_operator;

  bool empty() const;
  friend bool operator==(const ConceptUpdate&, const ConceptUpdate&) = default;
};

inline constexpr std::size_t kOperatorHistoryLimit = 32;

LocalConcept new_concept(std::string seed_summary, Timestamp now, IdSource& ids);

/// Throws DormantConceptError unless `lc` is active, InvalidUpdateError when
/// the update both adds and removes the same constraint key.
LocalConcept apply_update(const LocalConcept& lc, const ConceptUpdate& update, Timestamp now);

/// Copy with a new status; last_updated moves to `now`.
LocalConcept with_status(const LocalConcept& lc, ConceptStatus status, Timestamp now);

std::set<std::string> derive_topic_keywords(const LocalConcept& lc);

struct ConceptSummary {
  std::string task;
  std::string constraints;
  std::string intermediate;
  std::string pending;
  std::vector<std::string> constraint_items;
  std::vector<std::string> intermediate_items;
  std::vector<std::string> pending_items;
  std::string text;  // the four rendered section lines
  std::size_t token_count = 0;
  bool over_budget = false;
};

/// Renders TASK / CONSTRAINTS / INTERMEDIATE / PENDING within `token_budget`
/// tokens, truncating low-priority content first. Requires token_budget >= 10.
ConceptSummary summarize_concept(const LocalConcept& lc, std::size_t token_budget);

/// Same as summarize_concept without the minimum-budget precondition.
ConceptSummary render_concept_summary(const LocalConcept& lc, std::size_t token_budget);

nlohmann::json concept_to_json(const LocalConcept& lc);
LocalConcept concept_from_json(const nlohmann::json& doc);
std::string serialize_concept(const LocalConcept& lc);
LocalConcept parse_concept(std::string_view document);
LocalConcept roundtrip_serialize(const LocalConcept& lc);

nlohmann::json update_to_json(const ConceptUpdate& update);

}  // namespace concore
