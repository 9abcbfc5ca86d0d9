#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "concore/packet.hpp"

namespace concore {

struct GenerationHints {
  /// Pad the response to at least this many tokens (mock only).
  std::optional<std::size_t> response_tokens;
};

/// Anything that turns a concept packet into text. Implementations must be
/// safe to call from several sessions at once.
class ModelBackend {
 public:
  virtual ~ModelBackend() = default;
  /// Throws BackendError on failure.
  virtual std::string generate(const ConceptPacket& packet, const GenerationHints& hints) = 0;
};

// Mock templates are plain text with placeholders:
//   {operator}                 operator id
//   {task}                     TASK section
//   {constraints}              CONSTRAINTS section
//   {intermediate}             INTERMEDIATE section
//   {constraint_bullets}       one "- item" line per constraint
//   {intermediate_bullets}     one "- item" line per intermediate entry
//   {pending_bullets}          one "- item" line per pending question
// Empty sections render as "(none)"; empty bullet lists render nothing.
struct MockTemplates {
  std::string fallback = "{operator} result for: {task}";
  std::map<std::string, std::string> by_operator;

  static MockTemplates from_json(const nlohmann::json& doc);
  static MockTemplates load_file(const std::filesystem::path& path);
  /// Returns a copy with `overrides` (operator id -> template) layered on top.
  MockTemplates with_overrides(const nlohmann::json& overrides) const;
};

/// Deterministic: same packet and hints, same text.
std::string mock_generate(const ConceptPacket& packet, const MockTemplates& templates,
                          const GenerationHints& hints = {});

class MockBackend final : public ModelBackend {
 public:
  explicit MockBackend(MockTemplates templates) : templates_(std::move(templates)) {}

  std::string generate(const ConceptPacket& packet, const GenerationHints& hints) override;

  const MockTemplates& templates() const noexcept { return templates_; }

 private:
  MockTemplates templates_;
};

/// Chat-completions style endpoint. The packet text is sent as the only user
/// message; the first choice's content is returned verbatim.
struct RemoteConfig {
  std::string url;  // e.g. https://api.example.com/v1/chat/completions
  std::string api_key;
  std::string model = "gpt-4o-mini";
  std::chrono::seconds timeout{60};

  static constexpr const char* kUrlVar = "CONCORE_REMOTE_URL";
  static constexpr const char* kKeyVar = "CONCORE_REMOTE_API_KEY";
  static constexpr const char* kModelVar = "CONCORE_REMOTE_MODEL";
  static constexpr const char* kTimeoutVar = "CONCORE_REMOTE_TIMEOUT_S";

  /// Throws ConfigError when the URL or credential variable is unset.
  static RemoteConfig from_env();
};

std::string remote_generate(const ConceptPacket& packet, const RemoteConfig& config);

class RemoteBackend final : public ModelBackend {
 public:
  explicit RemoteBackend(RemoteConfig config);

  std::string generate(const ConceptPacket& packet, const GenerationHints& hints) override;

 private:
  RemoteConfig config_;
};

}  // namespace concore
