#pragma once

#include <filesystem>
#include <memory>

#include "concore/backend.hpp"
#include "concore/interpreter.hpp"

namespace concore {

/// Directory holding the shipped operator library, ruleset, lexicon, mock
/// templates and scenarios. CONCORE_DATA_DIR in the environment overrides the
/// build-time location.
std::filesystem::path default_data_dir();

struct DataPaths {
  std::filesystem::path operators;
  std::filesystem::path rules;
  std::filesystem::path lexicon;
  std::filesystem::path templates;

  static DataPaths in(const std::filesystem::path& dir);
};

std::shared_ptr<const TurnInterpreter> load_interpreter(const DataPaths& paths);

/// Path of a shipped scenario file, e.g. scenario_path("synthetic_10").
std::filesystem::path scenario_path(std::string_view name);

}  // namespace concore
