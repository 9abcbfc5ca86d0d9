#include <cstdlib>
#include <regex>

#include <fmt/format.h>
#include <httplib.h>

#include "concore/backend.hpp"
#include "concore/error.hpp"

namespace concore {

namespace {

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

}  // namespace

RemoteConfig RemoteConfig::from_env() {
  RemoteConfig c;
  auto url = env(kUrlVar);
  if (!url) throw ConfigError(fmt::format("remote backend: {} is not set", kUrlVar));
  auto key = env(kKeyVar);
  if (!key) throw ConfigError(fmt::format("remote backend: {} is not set", kKeyVar));
  c.url = *url;
  c.api_key = *key;
  if (auto model = env(kModelVar)) c.model = *model;
  if (auto t = env(kTimeoutVar)) {
    char* end = nullptr;
    const long secs = std::strtol(t->c_str(), &end, 10);
    if (end == t->c_str() || *end != '\0' || secs <= 0) {
      throw ConfigError(fmt::format("remote backend: {} must be a positive integer", kTimeoutVar));
    }
    c.timeout = std::chrono::seconds(secs);
  }
  return c;
}

std::string remote_generate(const ConceptPacket& packet, const RemoteConfig& config) {
  if (config.url.empty() || config.api_key.empty()) throw ConfigError("remote backend: url and api key required");

  static const std::regex url_re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(config.url, m, url_re)) throw ConfigError(fmt::format("remote backend: bad url '{}'", config.url));
  const std::string base = m[1].str();
  const std::string path = m[2].matched ? m[2].str() : "/";

  httplib::Client client(base);
  if (!client.is_valid()) throw BackendError(fmt::format("remote backend: unsupported endpoint {}", base));
  client.set_connection_timeout(config.timeout);
  client.set_read_timeout(config.timeout);
  client.set_write_timeout(config.timeout);
  client.set_bearer_token_auth(config.api_key);

  const nlohmann::json body = {
      {"model", config.model},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", packet.rendered_text}}})},
  };
  auto res = client.Post(path, body.dump(), "application/json");
  if (!res) throw BackendError(fmt::format("remote backend: {}", httplib::to_string(res.error())));
  if (res->status < 200 || res->status >= 300) {
    throw BackendError(fmt::format("remote backend: HTTP {}: {}", res->status, res->body.substr(0, 200)));
  }
  try {
    const auto doc = nlohmann::json::parse(res->body);
    return doc.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(fmt::format("remote backend: unexpected response: {}", e.what()));
  }
}

RemoteBackend::RemoteBackend(RemoteConfig config) : config_(std::move(config)) {
  if (config_.url.empty() || config_.api_key.empty()) throw ConfigError("remote backend: url and api key required");
}

std::string RemoteBackend::generate(const ConceptPacket& packet, const GenerationHints&) {
  return remote_generate(packet, config_);
}

}  // namespace concore
