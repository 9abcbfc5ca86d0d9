#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "concore/tokens.hpp"

// Counts frozen by tests/oracles/token_oracle.py before the build.
TEST_SUITE("fixtures") {
  TEST_CASE("token counts match the independent split oracle") {
    const std::filesystem::path dir = CONCORE_FIXTURE_DIR;
    std::ifstream in(dir / "token_counts.json");
    REQUIRE(in);
    const auto frozen = nlohmann::json::parse(in);
    REQUIRE(frozen.size() >= 8);
    for (const auto& [name, expected] : frozen.items()) {
      std::ifstream f(dir / "prompts" / name, std::ios::binary);
      REQUIRE(f);
      std::stringstream ss;
      ss << f.rdbuf();
      INFO(name);
      CHECK(concore::count_tokens(ss.str()) == expected.get<std::size_t>());
    }
  }
}
