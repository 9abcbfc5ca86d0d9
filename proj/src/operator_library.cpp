#include "concore/operator_library.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "concore/error.hpp"
#include "concore/predicate.hpp"
#include "concore/text.hpp"

namespace concore {

using nlohmann::json;

namespace {

constexpr std::pair<OperatorFamily, std::string_view> kFamilyNames[] = {
    {OperatorFamily::distillation_extraction, "Distillation & Extraction"},
    {OperatorFamily::transformation_rewriting, "Transformation & Rewriting"},
    {OperatorFamily::explanatory_reasoning, "Explanatory Reasoning"},
    {OperatorFamily::planning_structuring, "Planning & Structuring"},
    {OperatorFamily::evaluation_verification, "Evaluation & Verification"},
};

bool is_canonical_id(std::string_view id) {
  if (id.empty() || !std::isupper(static_cast<unsigned char>(id.front()))) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return std::isupper(static_cast<unsigned char>(c)) || std::isdigit(static_cast<unsigned char>(c)) ||
           c == '_';
  });
}

std::vector<std::string> string_list(const json& doc, const char* key, bool required) {
  if (!doc.contains(key)) {
    if (required) throw ParseError(fmt::format("missing field '{}'", key));
    return {};
  }
  const auto& v = doc.at(key);
  if (!v.is_array()) throw ParseError(fmt::format("field '{}' must be an array of strings", key));
  std::vector<std::string> out;
  for (const auto& item : v) {
    if (!item.is_string()) throw ParseError(fmt::format("field '{}' must be an array of strings", key));
    out.push_back(item.get<std::string>());
  }
  return out;
}

std::string string_field(const json& doc, const char* key, bool required) {
  if (!doc.contains(key)) {
    if (required) throw ParseError(fmt::format("missing field '{}'", key));
    return {};
  }
  if (!doc.at(key).is_string()) throw ParseError(fmt::format("field '{}' must be a string", key));
  return doc.at(key).get<std::string>();
}

}  // namespace

std::string_view family_name(OperatorFamily family) {
  for (const auto& [f, n] : kFamilyNames) {
    if (f == family) return n;
  }
  return "?";
}

std::optional<OperatorFamily> family_from_name(std::string_view name) {
  for (const auto& [f, n] : kFamilyNames) {
    if (n == name) return f;
  }
  return std::nullopt;
}

std::string normalize_operator_name(std::string_view name) {
  std::string out;
  bool sep = false;
  for (char c : name) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      if (sep && !out.empty()) out.push_back('_');
      sep = false;
      out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    } else {
      sep = true;
    }
  }
  return out;
}

ValidationReport validate_spec(const OperatorSpec& spec) {
  ValidationReport report;
  const auto& id = spec.operator_id.str();
  auto add = [&](std::string field, std::string reason) {
    report.violations.push_back({id, std::move(field), std::move(reason)});
  };

  if (id.empty()) {
    add("operator_id", "empty");
  } else if (!is_canonical_id(id)) {
    add("operator_id", "must be uppercase letters, digits and underscores");
  }
  if (text::trim(spec.description).empty()) add("description", "empty");
  if (text::trim(spec.expected_output).empty()) add("expected_output", "empty");
  for (const auto& req : spec.input_requirements) {
    try {
      parse_predicate(req);
    } catch (const PredicateError& e) {
      add("input_requirements", e.what());
    }
  }
  for (const auto& c : spec.reasoning_constraints) {
    if (text::trim(c).empty()) add("reasoning_constraints", "empty entry");
  }
  for (const auto& r : spec.state_update_rules) {
    if (text::trim(r).empty()) add("state_update_rules", "empty entry");
  }
  return report;
}

SatisfactionReport check_input_requirements(const OperatorSpec& spec, const LocalConcept& lc) {
  SatisfactionReport report;
  for (const auto& req : spec.input_requirements) {
    try {
      const Predicate p = parse_predicate(req);
      if (!evaluate(p, lc)) {
        report.failed.push_back(req);
        report.reasons.push_back("not satisfied: " + p.canonical());
      }
    } catch (const PredicateError& e) {
      report.failed.push_back(req);
      report.reasons.push_back(e.what());
    }
  }
  return report;
}

OperatorSpec spec_from_json(const json& doc) {
  if (!doc.is_object()) throw ParseError("operator spec must be an object");
  OperatorSpec spec;
  spec.operator_id = OperatorId(string_field(doc, "operator_id", true));
  if (doc.contains("family")) {
    const auto name = string_field(doc, "family", true);
    spec.family = family_from_name(name);
    if (!spec.family) throw ParseError(fmt::format("operator {}: unknown family '{}'", spec.operator_id.str(), name));
  }
  spec.description = string_field(doc, "description", true);
  spec.input_requirements = string_list(doc, "input_requirements", false);
  spec.expected_output = string_field(doc, "expected_output", true);
  spec.reasoning_constraints = string_list(doc, "reasoning_constraints", false);
  spec.state_update_rules = string_list(doc, "state_update_rules", false);
  return spec;
}

json spec_to_json(const OperatorSpec& spec) {
  json doc = {
      {"operator_id", spec.operator_id.str()},
      {"description", spec.description},
      {"input_requirements", spec.input_requirements},
      {"expected_output", spec.expected_output},
      {"reasoning_constraints", spec.reasoning_constraints},
      {"state_update_rules", spec.state_update_rules},
  };
  if (spec.family) doc["family"] = std::string(family_name(*spec.family));
  return doc;
}

OperatorLibrary OperatorLibrary::load(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("operator library: {}", e.what()));
  }
  if (!doc.is_object()) throw ParseError("operator library: top level must be an object");
  if (!doc.contains("operators") || !doc.at("operators").is_array()) {
    throw ParseError("operator library: missing 'operators' array");
  }

  OperatorLibrary lib;
  lib.document_ = std::string(document);
  lib.version_ = string_field(doc, "version", false);

  std::vector<std::string> bad_ids;
  std::vector<std::string> messages;
  for (const auto& item : doc.at("operators")) {
    OperatorSpec spec;
    try {
      spec = spec_from_json(item);
    } catch (const json::exception& e) {
      throw ParseError(fmt::format("operator library: {}", e.what()));
    }
    const std::string id = spec.operator_id.str();
    if (lib.operators_.contains(spec.operator_id)) throw DuplicateOperatorError(id);

    auto report = validate_spec(spec);
    if (!spec.family) report.violations.push_back({id, "family", "missing"});
    if (!report.ok()) {
      bad_ids.push_back(id);
      for (const auto& v : report.violations) messages.push_back(fmt::format("{}.{}: {}", id, v.field, v.reason));
    }
    lib.operators_.emplace(spec.operator_id, std::move(spec));
  }

  if (doc.contains("aliases")) {
    const auto& aliases = doc.at("aliases");
    if (!aliases.is_object()) throw ParseError("operator library: 'aliases' must be an object");
    for (const auto& [name, target] : aliases.items()) {
      if (!target.is_string()) throw ParseError(fmt::format("alias '{}' must map to a string", name));
      OperatorId id(target.get<std::string>());
      if (!lib.operators_.contains(id)) {
        bad_ids.push_back(name);
        messages.push_back(fmt::format("alias {} -> {}: target does not exist", name, id.str()));
        continue;
      }
      lib.aliases_.emplace(normalize_operator_name(name), std::move(id));
    }
  }

  if (!bad_ids.empty()) {
    throw ValidationError(fmt::format("operator library failed validation:\n  {}", fmt::join(messages, "\n  ")),
                          std::move(bad_ids));
  }
  return lib;
}

OperatorLibrary OperatorLibrary::load_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(fmt::format("cannot read operator library '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return load(buf.str());
}

const OperatorSpec* OperatorLibrary::find(const OperatorId& id) const {
  auto it = operators_.find(id);
  return it == operators_.end() ? nullptr : &it->second;
}

const OperatorSpec& OperatorLibrary::get(const OperatorId& id) const {
  if (const auto* spec = find(id)) return *spec;
  return get(resolve_alias(id.str()));
}

OperatorId OperatorLibrary::resolve_alias(std::string_view name) const {
  const std::string key = normalize_operator_name(name);
  if (OperatorId id(key); operators_.contains(id)) return id;
  if (auto it = aliases_.find(key); it != aliases_.end()) return it->second;

  std::vector<std::pair<std::size_t, std::string>> ranked;
  for (const auto& [id, _] : operators_) ranked.emplace_back(text::edit_distance(key, id.str()), id.str());
  for (const auto& [alias, _] : aliases_) ranked.emplace_back(text::edit_distance(key, alias), alias);
  std::sort(ranked.begin(), ranked.end());
  std::vector<std::string> nearest;
  for (std::size_t i = 0; i < ranked.size() && nearest.size() < 3; ++i) nearest.push_back(ranked[i].second);
  throw UnknownOperatorError(std::string(name), std::move(nearest));
}

std::vector<OperatorId> OperatorLibrary::members(OperatorFamily family) const {
  std::vector<OperatorId> out;
  for (const auto& [id, spec] : operators_) {
    if (spec.family == family) out.push_back(id);
  }
  return out;
}

ValidationReport check_canonical_shape(const OperatorLibrary& library) {
  ValidationReport report;
  if (library.size() != 40) {
    report.violations.push_back({"", "operators", fmt::format("expected 40 operators, found {}", library.size())});
  }
  for (auto family : kAllFamilies) {
    const auto n = library.members(family).size();
    if (n != 8) {
      report.violations.push_back(
          {"", "family", fmt::format("expected 8 operators in '{}', found {}", family_name(family), n)});
    }
  }
  return report;
}

}  // namespace concore
