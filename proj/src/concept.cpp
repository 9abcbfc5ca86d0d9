#include "concore/concept.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

#include "concore/error.hpp"
#include "concore/text.hpp"
#include "concore/tokens.hpp"

namespace concore {

using nlohmann::json;

// ---- OrderedMap -------------------------------------------------------------

OrderedMap::OrderedMap(std::initializer_list<Entry> entries) {
  for (const auto& [k, v] : entries) upsert(k, v);
}

void OrderedMap::upsert(std::string key, std::string value) {
  for (auto& e : entries_) {
    if (e.first == key) {
      e.second = std::move(value);
      return;
    }
  }
  entries_.emplace_back(std::move(key), std::move(value));
}

bool OrderedMap::erase(std::string_view key) {
  auto it = std::find_if(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.first == key; });
  if (it == entries_.end()) return false;
  entries_.erase(it);
  return true;
}

const std::string* OrderedMap::find(std::string_view key) const {
  for (const auto& e : entries_) {
    if (e.first == key) return &e.second;
  }
  return nullptr;
}

// ---- LocalConcept -----------------------------------------------------------

std::string_view to_string(ConceptStatus s) { return s == ConceptStatus::active ? "active" : "dormant"; }

bool ConceptUpdate::empty() const {
  return !summary_revision && add_constraints.empty() && remove_constraints.empty() && set_intermediate.empty() &&
         add_pending.empty() && resolve.empty() && !next_operator;
}

std::set<std::string> derive_topic_keywords(const LocalConcept& lc) {
  std::set<std::string> out;
  text::add_keywords(lc.task_summary, out);
  for (const auto& [k, v] : lc.constraints) {
    text::add_keywords(k, out);
    text::add_keywords(v, out);
  }
  for (const auto& [k, v] : lc.intermediate_results) text::add_keywords(k, out);
  return out;
}

LocalConcept new_concept(std::string seed_summary, Timestamp now, IdSource& ids) {
  LocalConcept lc;
  lc.concept_id = ids.next("lc");
  lc.task_summary = std::move(seed_summary);
  lc.status = ConceptStatus::active;
  lc.last_updated = now;
  lc.topic_keywords = derive_topic_keywords(lc);
  return lc;
}

LocalConcept apply_update(const LocalConcept& lc, const ConceptUpdate& update, Timestamp now) {
  if (lc.status != ConceptStatus::active) {
    throw DormantConceptError(fmt::format("concept {} is dormant", lc.concept_id));
  }
  for (const auto& key : update.remove_constraints) {
    if (update.add_constraints.contains(key)) {
      throw InvalidUpdateError(fmt::format("constraint '{}' both added and removed", key));
    }
  }

  LocalConcept out = lc;
  if (update.summary_revision) out.task_summary = *update.summary_revision;
  for (const auto& [k, v] : update.add_constraints) out.constraints.upsert(k, v);
  for (const auto& k : update.remove_constraints) out.constraints.erase(k);
  for (const auto& [k, v] : update.set_intermediate) out.intermediate_results.upsert(k, v);

  auto has = [](const std::vector<std::string>& list, const std::string& s) {
    return std::find(list.begin(), list.end(), s) != list.end();
  };
  for (const auto& q : update.add_pending) {
    if (!has(out.pending_questions, q) && !has(out.resolved_questions, q)) out.pending_questions.push_back(q);
  }
  for (const auto& q : update.resolve) {
    std::erase(out.pending_questions, q);
    if (!has(out.resolved_questions, q)) out.resolved_questions.push_back(q);
  }

  if (update.next_operator) {
    out.active_operator = update.next_operator;
    if (out.operator_history.empty() || out.operator_history.back() != *update.next_operator) {
      out.operator_history.push_back(*update.next_operator);
    }
    if (out.operator_history.size() > kOperatorHistoryLimit) {
      out.operator_history.erase(out.operator_history.begin(),
                                 out.operator_history.end() - static_cast<std::ptrdiff_t>(kOperatorHistoryLimit));
    }
  }

  out.last_updated = now;
  out.topic_keywords = derive_topic_keywords(out);
  return out;
}

LocalConcept with_status(const LocalConcept& lc, ConceptStatus status, Timestamp now) {
  LocalConcept out = lc;
  out.status = status;
  out.last_updated = now;
  return out;
}

// ---- summary ----------------------------------------------------------------

namespace {

std::string one_line(std::string_view s) {
  std::string out(s);
  std::replace_if(out.begin(), out.end(), [](char c) { return c == '\n' || c == '\r'; }, ' ');
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += "; ";
    out += items[i];
  }
  return out;
}

// How much has been cut, in ladder order.
struct Cuts {
  std::size_t pending = 0;             // oldest pending questions dropped
  std::size_t intermediate_values = 0; // oldest intermediate entries reduced to keys
  std::size_t intermediate = 0;        // oldest intermediate entries dropped
  std::size_t constraint_values = 0;   // oldest constraints reduced to keys
};

ConceptSummary render(const LocalConcept& lc, const Cuts& cuts) {
  ConceptSummary s;
  s.task = one_line(lc.task_summary);

  std::size_t i = 0;
  for (const auto& [k, v] : lc.constraints) {
    s.constraint_items.push_back(i++ < cuts.constraint_values ? one_line(k) : one_line(k) + "=" + one_line(v));
  }
  i = 0;
  for (const auto& [k, v] : lc.intermediate_results) {
    const std::size_t idx = i++;
    if (idx < cuts.intermediate) continue;
    s.intermediate_items.push_back(idx < cuts.intermediate_values ? one_line(k)
                                                                   : one_line(k) + ": " + one_line(v));
  }
  for (std::size_t p = cuts.pending; p < lc.pending_questions.size(); ++p) {
    s.pending_items.push_back(one_line(lc.pending_questions[p]));
  }

  s.constraints = join(s.constraint_items);
  s.intermediate = join(s.intermediate_items);
  s.pending = join(s.pending_items);

  auto line = [](std::string_view header, const std::string& body) {
    return fmt::format("[{}] {}\n", header, body.empty() ? "(none)" : body);
  };
  s.text = line("TASK", s.task) + line("CONSTRAINTS", s.constraints) + line("INTERMEDIATE", s.intermediate) +
           line("PENDING", s.pending);
  s.token_count = count_tokens(s.text);
  return s;
}

bool advance(Cuts& cuts, const LocalConcept& lc) {
  const std::size_t n_inter = lc.intermediate_results.size();
  if (cuts.pending < lc.pending_questions.size()) {
    ++cuts.pending;
  } else if (cuts.intermediate_values < n_inter) {
    ++cuts.intermediate_values;
  } else if (cuts.intermediate < n_inter) {
    ++cuts.intermediate;
  } else if (cuts.constraint_values < lc.constraints.size()) {
    // Resolved questions are not rendered, so their rung is a no-op here.
    ++cuts.constraint_values;
  } else {
    return false;
  }
  return true;
}

}  // namespace

ConceptSummary render_concept_summary(const LocalConcept& lc, std::size_t token_budget) {
  Cuts cuts;
  ConceptSummary s = render(lc, cuts);
  while (s.token_count > token_budget) {
    if (!advance(cuts, lc)) {
      s.over_budget = true;
      break;
    }
    s = render(lc, cuts);
  }
  return s;
}

ConceptSummary summarize_concept(const LocalConcept& lc, std::size_t token_budget) {
  if (token_budget < 10) throw std::invalid_argument("summary token budget must be >= 10");
  return render_concept_summary(lc, token_budget);
}

// ---- persistence ------------------------------------------------------------

namespace {

json pairs(const OrderedMap& map) {
  json arr = json::array();
  for (const auto& [k, v] : map) arr.push_back(json::array({k, v}));
  return arr;
}

const json& field(const json& doc, const char* key) {
  if (!doc.contains(key)) throw ParseError(fmt::format("concept: missing field '{}'", key));
  return doc.at(key);
}

std::string str(const json& doc, const char* key) {
  const auto& v = field(doc, key);
  if (!v.is_string()) throw ParseError(fmt::format("concept: field '{}' must be a string", key));
  return v.get<std::string>();
}

std::vector<std::string> str_list(const json& doc, const char* key) {
  const auto& v = field(doc, key);
  if (!v.is_array()) throw ParseError(fmt::format("concept: field '{}' must be an array", key));
  std::vector<std::string> out;
  for (const auto& item : v) {
    if (!item.is_string()) throw ParseError(fmt::format("concept: field '{}' must hold strings", key));
    out.push_back(item.get<std::string>());
  }
  return out;
}

OrderedMap pair_list(const json& doc, const char* key) {
  const auto& v = field(doc, key);
  if (!v.is_array()) throw ParseError(fmt::format("concept: field '{}' must be an array of pairs", key));
  OrderedMap out;
  for (const auto& item : v) {
    if (!item.is_array() || item.size() != 2 || !item[0].is_string() || !item[1].is_string()) {
      throw ParseError(fmt::format("concept: field '{}' must be an array of [key, value] pairs", key));
    }
    const auto k = item[0].get<std::string>();
    if (out.contains(k)) throw ParseError(fmt::format("concept: duplicate key '{}' in '{}'", k, key));
    out.upsert(k, item[1].get<std::string>());
  }
  return out;
}

}  // namespace

json concept_to_json(const LocalConcept& lc) {
  json history = json::array();
  for (const auto& op : lc.operator_history) history.push_back(op.str());
  return json{
      {"concept_id", lc.concept_id},
      {"task_summary", lc.task_summary},
      {"constraints", pairs(lc.constraints)},
      {"intermediate_results", pairs(lc.intermediate_results)},
      {"resolved_questions", lc.resolved_questions},
      {"pending_questions", lc.pending_questions},
      {"active_operator", lc.active_operator ? json(lc.active_operator->str()) : json(nullptr)},
      {"operator_history", history},
      {"status", std::string(to_string(lc.status))},
      {"topic_keywords", lc.topic_keywords},
      {"last_updated", format_iso8601(lc.last_updated)},
  };
}

LocalConcept concept_from_json(const json& doc) {
  if (!doc.is_object()) throw ParseError("concept: document must be an object");
  LocalConcept lc;
  lc.concept_id = str(doc, "concept_id");
  if (lc.concept_id.empty()) throw ParseError("concept: empty concept_id");
  lc.task_summary = str(doc, "task_summary");
  lc.constraints = pair_list(doc, "constraints");
  lc.intermediate_results = pair_list(doc, "intermediate_results");
  lc.resolved_questions = str_list(doc, "resolved_questions");
  lc.pending_questions = str_list(doc, "pending_questions");

  const auto& op = field(doc, "active_operator");
  if (op.is_string()) {
    lc.active_operator = OperatorId(op.get<std::string>());
  } else if (!op.is_null()) {
    throw ParseError("concept: active_operator must be a string or null");
  }
  for (auto& id : str_list(doc, "operator_history")) lc.operator_history.emplace_back(std::move(id));

  const auto status = str(doc, "status");
  if (status == "active") {
    lc.status = ConceptStatus::active;
  } else if (status == "dormant") {
    lc.status = ConceptStatus::dormant;
  } else {
    throw ParseError(fmt::format("concept: bad status '{}'", status));
  }
  for (auto& k : str_list(doc, "topic_keywords")) lc.topic_keywords.insert(std::move(k));
  lc.last_updated = parse_iso8601(str(doc, "last_updated"));
  return lc;
}

std::string serialize_concept(const LocalConcept& lc) { return concept_to_json(lc).dump(); }

LocalConcept parse_concept(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("concept: {}", e.what()));
  }
  return concept_from_json(doc);
}

LocalConcept roundtrip_serialize(const LocalConcept& lc) { return parse_concept(serialize_concept(lc)); }

json update_to_json(const ConceptUpdate& u) {
  json doc = {
      {"summary_revision", u.summary_revision ? json(*u.summary_revision) : json(nullptr)},
      {"add_constraints", pairs(u.add_constraints)},
      {"remove_constraints", u.remove_constraints},
      {"set_intermediate", pairs(u.set_intermediate)},
      {"add_pending", u.add_pending},
      {"resolve", u.resolve},
      {"next_operator", u.next_operator ? json(u.next_operator->str()) : json(nullptr)},
  };
  return doc;
}

}  // namespace concore
