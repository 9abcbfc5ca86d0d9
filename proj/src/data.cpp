#include "concore/data.hpp"

#include <cstdlib>

namespace concore {

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("CONCORE_DATA_DIR"); env != nullptr && *env != '\0') return env;
  return CONCORE_DATA_DIR;
}

DataPaths DataPaths::in(const std::filesystem::path& dir) {
  return {dir / "operators.json", dir / "rules.json", dir / "lexicon.json", dir / "mock_templates.json"};
}

std::shared_ptr<const TurnInterpreter> load_interpreter(const DataPaths& paths) {
  auto library = std::make_shared<const OperatorLibrary>(OperatorLibrary::load_file(paths.operators));
  auto rules = load_ruleset_file(paths.rules, *library);
  return std::make_shared<const TurnInterpreter>(library, std::move(rules), ExtractionLexicon::load_file(paths.lexicon));
}

std::filesystem::path scenario_path(std::string_view name) {
  return default_data_dir() / "scenarios" / (std::string(name) + ".json");
}

}  // namespace concore
