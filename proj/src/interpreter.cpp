#include "concore/interpreter.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "concore/error.hpp"

namespace concore {

using nlohmann::json;

namespace {

std::string normalize_phrase(std::string_view s) { return text::trim(text::to_lower(s)); }

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open {}", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::vector<std::string> string_list(const json& doc, const char* key, const std::string& where) {
  std::vector<std::string> out;
  if (!doc.contains(key)) return out;
  const auto& arr = doc.at(key);
  if (!arr.is_array()) throw ParseError(fmt::format("{}: '{}' must be an array", where, key));
  for (const auto& item : arr) {
    if (!item.is_string()) throw ParseError(fmt::format("{}: '{}' must hold strings", where, key));
    out.push_back(item.get<std::string>());
  }
  return out;
}

}  // namespace

// ---- operator selection -----------------------------------------------------

std::vector<SelectionRule> load_ruleset(const json& doc, const OperatorLibrary& library) {
  if (!doc.is_array()) throw ParseError("ruleset: document must be an array of rules");
  std::vector<SelectionRule> rules;
  std::set<int> priorities;
  std::set<std::string> ids;
  for (const auto& item : doc) {
    if (!item.is_object()) throw ParseError("ruleset: each rule must be an object");
    SelectionRule rule;
    if (!item.contains("rule_id") || !item["rule_id"].is_string()) throw ParseError("ruleset: rule without rule_id");
    rule.rule_id = item["rule_id"].get<std::string>();
    const std::string where = fmt::format("ruleset: rule '{}'", rule.rule_id);
    if (rule.rule_id.empty() || rule.rule_id == kDefaultRuleId) throw ParseError(where + ": reserved or empty rule_id");
    if (!ids.insert(rule.rule_id).second) throw ParseError(where + ": duplicate rule_id");

    if (!item.contains("priority") || !item["priority"].is_number_integer()) {
      throw ParseError(where + ": integer priority required");
    }
    rule.priority = item["priority"].get<int>();
    if (!priorities.insert(rule.priority).second) {
      throw ParseError(fmt::format("{}: duplicate priority {}", where, rule.priority));
    }

    if (!item.contains("trigger") || !item["trigger"].is_object()) throw ParseError(where + ": trigger object required");
    const auto& trig = item["trigger"];
    for (auto& k : string_list(trig, "keywords", where)) {
      auto norm = normalize_phrase(k);
      if (norm.empty()) throw ParseError(where + ": empty trigger keyword");
      rule.trigger.keywords.push_back(std::move(norm));
    }
    if (trig.contains("phrase")) {
      if (!trig["phrase"].is_string()) throw ParseError(where + ": trigger phrase must be a string");
      rule.trigger.phrase = normalize_phrase(trig["phrase"].get<std::string>());
      if (rule.trigger.phrase->empty()) throw ParseError(where + ": empty trigger phrase");
    }
    if (rule.trigger.keywords.empty() && !rule.trigger.phrase) throw ParseError(where + ": trigger matches nothing");

    if (item.contains("guard") && !item["guard"].is_null()) {
      if (!item["guard"].is_string()) throw ParseError(where + ": guard must be a predicate string");
      rule.guard = parse_predicate(item["guard"].get<std::string>());
    }
    if (!item.contains("operator") || !item["operator"].is_string()) throw ParseError(where + ": operator required");
    rule.op = library.resolve_alias(item["operator"].get<std::string>());
    rules.push_back(std::move(rule));
  }
  std::sort(rules.begin(), rules.end(), [](const auto& a, const auto& b) { return a.priority < b.priority; });
  return rules;
}

std::vector<SelectionRule> load_ruleset_file(const std::filesystem::path& path, const OperatorLibrary& library) {
  return load_ruleset(read_json_file(path), library);
}

bool trigger_matches(const Trigger& trigger, std::string_view instruction) {
  const std::string padded = text::padded_words(instruction);
  if (trigger.phrase && !text::starts_with_phrase(padded, *trigger.phrase)) return false;
  if (trigger.keywords.empty()) return trigger.phrase.has_value();
  return std::any_of(trigger.keywords.begin(), trigger.keywords.end(),
                     [&](const std::string& k) { return text::contains_phrase(padded, k); });
}

bool is_interrogative(std::string_view instruction) {
  static const std::set<std::string, std::less<>> openers = {
      "what", "how",  "why",    "when",  "where", "who",  "which", "can", "could", "would",
      "should", "is", "are",    "do",    "does",  "did",  "will",  "may", "shall", "whose",
  };
  const std::string t = text::trim(instruction);
  if (t.ends_with('?')) return true;
  const auto w = text::words(t);
  return !w.empty() && openers.contains(w.front());
}

Selection select_operator(std::string_view instruction, const LocalConcept& lc, std::span<const SelectionRule> ruleset,
                          const OperatorLibrary& library) {
  for (const auto& rule : ruleset) {
    if (!trigger_matches(rule.trigger, instruction)) continue;
    if (rule.guard && !evaluate(*rule.guard, lc)) continue;
    const OperatorSpec* spec = library.find(rule.op);
    if (spec == nullptr || !check_input_requirements(*spec, lc).satisfied()) continue;
    return {rule.op, rule.rule_id};
  }
  return {OperatorId(is_interrogative(instruction) ? "EXPLAIN" : "SUMMARIZE"), std::string(kDefaultRuleId)};
}

// ---- topic classification ---------------------------------------------------

std::string_view to_string(TopicKind k) {
  switch (k) {
    case TopicKind::continue_topic: return "continue";
    case TopicKind::switch_new: return "switch_new";
    case TopicKind::reactivate: return "reactivate";
  }
  return "?";
}

TopicKind topic_kind_from_string(std::string_view s) {
  if (s == "continue") return TopicKind::continue_topic;
  if (s == "switch_new") return TopicKind::switch_new;
  if (s == "reactivate") return TopicKind::reactivate;
  throw ParseError(fmt::format("unknown topic decision '{}'", s));
}

std::vector<std::string> TopicPolicy::default_switch_markers() {
  return {"switching gears", "switch gears",          "new topic",          "different topic",
          "change of topic", "changing the subject", "unrelated question"};
}

TopicDecision classify_topic(std::string_view instruction, const LocalConcept* active,
                             std::span<const LocalConcept> dormants, const TopicPolicy& policy) {
  const auto query = text::keywords(instruction);
  const std::string padded = text::padded_words(instruction);
  const bool marker = std::any_of(policy.switch_markers.begin(), policy.switch_markers.end(),
                                  [&](const std::string& m) { return text::contains_phrase(padded, m); });

  const double active_score =
      active != nullptr ? text::keyword_similarity(query, active->topic_keywords, policy.measure) : 0.0;
  if (active != nullptr && !marker && active_score >= policy.theta) {
    return {TopicKind::continue_topic, std::nullopt, active_score};
  }

  const LocalConcept* best = nullptr;
  double best_score = 0.0;
  for (const auto& d : dormants) {
    if (active != nullptr && d.concept_id == active->concept_id) continue;
    const double s = text::keyword_similarity(query, d.topic_keywords, policy.measure);
    const bool better = best == nullptr || s > best_score ||
                        (s == best_score && (d.last_updated > best->last_updated ||
                                             (d.last_updated == best->last_updated && d.concept_id < best->concept_id)));
    if (better) {
      best = &d;
      best_score = s;
    }
  }
  if (best != nullptr && best_score >= policy.theta) {
    return {TopicKind::reactivate, best->concept_id, best_score};
  }

  // Without an explicit marker, low overlap is a follow-up ("Compare those
  // two."), not a new topic.
  if (active != nullptr && !marker) return {TopicKind::continue_topic, std::nullopt, active_score};
  return {TopicKind::switch_new, std::nullopt, active_score};
}

// ---- extraction -------------------------------------------------------------

ExtractionLexicon ExtractionLexicon::from_json(const json& doc) {
  if (!doc.is_object()) throw ParseError("lexicon: document must be an object");
  ExtractionLexicon lex;
  std::set<std::string> seen;
  if (doc.contains("constraint_map")) {
    const auto& cmap = doc.at("constraint_map");
    if (!cmap.is_array()) throw ParseError("lexicon: constraint_map must be an array");
    for (const auto& e : cmap) {
      if (!e.is_object() || !e.contains("phrase") || !e.contains("key") || !e.contains("value") ||
          !e["phrase"].is_string() || !e["key"].is_string() || !e["value"].is_string()) {
        throw ParseError("lexicon: constraint_map entries need string phrase, key, value");
      }
      ConstraintEntry entry{normalize_phrase(e["phrase"].get<std::string>()), e["key"].get<std::string>(),
                            e["value"].get<std::string>()};
      if (entry.phrase.empty() || entry.key.empty()) throw ParseError("lexicon: empty phrase or key");
      if (!seen.insert(entry.phrase).second) {
        throw ParseError(fmt::format("lexicon: duplicate phrase '{}'", entry.phrase));
      }
      lex.constraint_map.push_back(std::move(entry));
    }
  }
  for (auto& m : string_list(doc, "question_markers", "lexicon")) lex.question_markers.push_back(normalize_phrase(m));
  for (auto& m : string_list(doc, "switch_markers", "lexicon")) lex.switch_markers.push_back(normalize_phrase(m));
  if (doc.contains("list_item_pattern")) {
    if (!doc["list_item_pattern"].is_string()) throw ParseError("lexicon: list_item_pattern must be a string");
    lex.list_item_pattern = doc["list_item_pattern"].get<std::string>();
  }
  try {
    lex.compiled_ = std::make_shared<const std::regex>(lex.list_item_pattern);
  } catch (const std::regex_error& e) {
    throw ParseError(fmt::format("lexicon: bad list_item_pattern: {}", e.what()));
  }
  if (lex.compiled_->mark_count() < 1) throw ParseError("lexicon: list_item_pattern needs a capture group");
  return lex;
}

ExtractionLexicon ExtractionLexicon::load_file(const std::filesystem::path& path) {
  return from_json(read_json_file(path));
}

const std::regex& ExtractionLexicon::list_item_regex() const {
  if (compiled_) return *compiled_;
  thread_local std::map<std::string, std::regex> cache;
  auto it = cache.find(list_item_pattern);
  if (it == cache.end()) it = cache.emplace(list_item_pattern, std::regex(list_item_pattern)).first;
  return it->second;
}

ConceptUpdate extract_from_instruction(std::string_view instruction, const ExtractionLexicon& lexicon) {
  ConceptUpdate u;
  const std::string padded = text::padded_words(instruction);
  for (const auto& e : lexicon.constraint_map) {
    if (text::contains_phrase(padded, e.phrase)) u.add_constraints.upsert(e.key, e.value);
  }
  for (const auto& sentence : text::split_sentences(instruction)) {
    const std::string sp = text::padded_words(sentence);
    const bool question =
        sentence.ends_with('?') ||
        std::any_of(lexicon.question_markers.begin(), lexicon.question_markers.end(),
                    [&](const std::string& m) { return text::contains_phrase(sp, m); });
    if (question && std::find(u.add_pending.begin(), u.add_pending.end(), sentence) == u.add_pending.end()) {
      u.add_pending.push_back(sentence);
    }
  }
  return u;
}

ConceptUpdate extract_from_response(std::string_view response, const OperatorSpec& spec,
                                    const ExtractionLexicon& lexicon) {
  ConceptUpdate u;
  const std::string& op = spec.operator_id.str();
  const auto lines = text::split_lines(response);
  u.set_intermediate.upsert(op + "_result", lines.empty() ? std::string() : text::trim(lines.front()));

  const std::regex& re = lexicon.list_item_regex();
  std::size_t n = 0;
  std::smatch m;
  for (const auto& line : lines) {
    if (std::regex_match(line, m, re)) u.set_intermediate.upsert(fmt::format("{}_item_{}", op, ++n), m[1].str());
  }
  return u;
}

// ---- TurnInterpreter --------------------------------------------------------

TurnInterpreter::TurnInterpreter(std::shared_ptr<const OperatorLibrary> library, std::vector<SelectionRule> rules,
                                 ExtractionLexicon lexicon)
    : library_(std::move(library)), rules_(std::move(rules)), lexicon_(std::move(lexicon)) {
  if (!library_) throw ConfigError("interpreter needs an operator library");
  std::stable_sort(rules_.begin(), rules_.end(), [](const auto& a, const auto& b) { return a.priority < b.priority; });
  for (const char* def : {"EXPLAIN", "SUMMARIZE"}) {
    const auto* spec = library_->find(OperatorId(def));
    if (spec == nullptr) throw ConfigError(fmt::format("library lacks default operator {}", def));
    if (!spec->input_requirements.empty()) {
      throw ConfigError(fmt::format("default operator {} must have no input requirements", def));
    }
  }
}

Selection TurnInterpreter::select(std::string_view instruction, const LocalConcept& lc) const {
  return select_operator(instruction, lc, rules_, *library_);
}

TopicDecision TurnInterpreter::classify(std::string_view instruction, const LocalConcept* active,
                                        std::span<const LocalConcept> dormants, double theta,
                                        text::SimilarityMeasure measure) const {
  TopicPolicy policy{theta, measure};
  if (!lexicon_.switch_markers.empty()) policy.switch_markers = lexicon_.switch_markers;
  return classify_topic(instruction, active, dormants, policy);
}

ConceptUpdate TurnInterpreter::from_instruction(std::string_view instruction) const {
  return extract_from_instruction(instruction, lexicon_);
}

ConceptUpdate TurnInterpreter::from_response(std::string_view response, const OperatorSpec& spec) const {
  return extract_from_response(response, spec, lexicon_);
}

}  // namespace concore
