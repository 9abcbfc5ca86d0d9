#include "concore/backend.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "concore/error.hpp"
#include "concore/text.hpp"
#include "concore/tokens.hpp"

namespace concore {

using nlohmann::json;

namespace {

std::string template_text(const json& v, const std::string& where) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_string()) throw ParseError(fmt::format("{}: template lines must be strings", where));
      if (i) out += '\n';
      out += v[i].get<std::string>();
    }
    return out;
  }
  throw ParseError(fmt::format("{}: template must be a string or array of lines", where));
}

std::string section(const ConceptPacket& p, const char* key) {
  auto it = p.sections.find(key);
  return it == p.sections.end() || it->second.empty() ? "(none)" : it->second;
}

std::vector<std::string> items(const ConceptPacket& p, const char* key) {
  auto it = p.section_items.find(key);
  return it == p.section_items.end() ? std::vector<std::string>{} : it->second;
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size()) {
    s.replace(pos, from.size(), to);
  }
}

}  // namespace

MockTemplates MockTemplates::from_json(const json& doc) {
  if (!doc.is_object()) throw ParseError("mock templates: document must be an object");
  MockTemplates t;
  if (doc.contains("fallback")) t.fallback = template_text(doc["fallback"], "mock templates: fallback");
  if (doc.contains("templates")) {
    const auto& by = doc["templates"];
    if (!by.is_object()) throw ParseError("mock templates: 'templates' must be an object");
    for (const auto& [op, v] : by.items()) t.by_operator[op] = template_text(v, "mock templates: " + op);
  }
  return t;
}

MockTemplates MockTemplates::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open {}", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return from_json(json::parse(ss.str()));
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

MockTemplates MockTemplates::with_overrides(const json& overrides) const {
  MockTemplates out = *this;
  if (overrides.is_null()) return out;
  if (!overrides.is_object()) throw ParseError("mock template overrides must be an object");
  for (const auto& [op, v] : overrides.items()) out.by_operator[op] = template_text(v, "mock override " + op);
  return out;
}

std::string mock_generate(const ConceptPacket& packet, const MockTemplates& templates, const GenerationHints& hints) {
  auto it = templates.by_operator.find(packet.operator_id.str());
  const std::string& tmpl = it != templates.by_operator.end() ? it->second : templates.fallback;

  const std::pair<const char*, const char*> bullet_lists[] = {
      {"{constraint_bullets}", "CONSTRAINTS"},
      {"{intermediate_bullets}", "INTERMEDIATE"},
      {"{pending_bullets}", "PENDING"},
  };
  auto fill_inline = [&](std::string line) {
    replace_all(line, "{operator}", packet.operator_id.str());
    replace_all(line, "{task}", section(packet, "TASK"));
    replace_all(line, "{constraints}", section(packet, "CONSTRAINTS"));
    replace_all(line, "{intermediate}", section(packet, "INTERMEDIATE"));
    for (const auto& [ph, key] : bullet_lists) {
      std::string joined;
      for (const auto& item : items(packet, key)) joined += (joined.empty() ? "" : "; ") + item;
      replace_all(line, ph, joined);
    }
    return line;
  };

  std::vector<std::string> out;
  for (const auto& line : text::split_lines(tmpl)) {
    const std::string t = text::trim(line);
    bool expanded = false;
    for (const auto& [ph, key] : bullet_lists) {
      if (t != ph) continue;
      // A bullet placeholder on its own line expands to one line per item.
      for (const auto& item : items(packet, key)) out.push_back("- " + item);
      expanded = true;
    }
    if (!expanded) out.push_back(fill_inline(line));
  }

  std::string response;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (i) response += '\n';
    response += out[i];
  }

  if (hints.response_tokens) {
    const std::size_t have = count_tokens(response);
    if (have < *hints.response_tokens) {
      std::string filler = "Notes:";
      for (std::size_t i = have + 1; i < *hints.response_tokens; ++i) filler += " detail";
      response += response.empty() ? "(empty)\n" + filler : "\n" + filler;
    }
  }
  return response;
}

std::string MockBackend::generate(const ConceptPacket& packet, const GenerationHints& hints) {
  return mock_generate(packet, templates_, hints);
}

}  // namespace concore
