#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <thread>

#include "concore/concept_store.hpp"
#include "concore/error.hpp"
#include "support.hpp"

using namespace concore;
using concore::testing::at;
namespace fs = std::filesystem;

namespace {

constexpr std::int64_t kDay = 86400;

LocalConcept named(const std::string& id, std::int64_t t, ConceptStatus status = ConceptStatus::dormant) {
  LocalConcept lc;
  lc.concept_id = id;
  lc.task_summary = "topic " + id;
  lc.status = status;
  lc.last_updated = at(t);
  return lc;
}

std::vector<std::string> ids_of(const std::vector<EvictedEntry>& v) {
  std::vector<std::string> out;
  for (const auto& e : v) out.push_back(e.concept_id);
  return out;
}

StoreConfig cap(std::size_t n) {
  StoreConfig c;
  c.capacity_per_user = n;
  return c;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("concore-store-" + std::to_string(::getpid()) + "-" +
                                        std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())));
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_SUITE("concept_store") {
  TEST_CASE("LRU eviction") {
    ConceptStore s(cap(2));
    CHECK(s.upsert("u", named("A", 1)).empty());
    CHECK(s.upsert("u", named("B", 2)).empty());
    CHECK(ids_of(s.upsert("u", named("C", 3))) == std::vector<std::string>{"A"});

    ConceptStore t(cap(2));
    t.upsert("u", named("A", 1));
    t.upsert("u", named("B", 2));
    t.touch("u", "A", at(3));
    CHECK(ids_of(t.upsert("u", named("C", 4))) == std::vector<std::string>{"B"});
  }

  TEST_CASE("re-upsert replaces without eviction") {
    ConceptStore s(cap(2));
    s.upsert("u", named("A", 1));
    s.upsert("u", named("B", 2));
    auto a2 = named("A", 3);
    a2.task_summary = "changed";
    CHECK(s.upsert("u", a2).empty());
    CHECK(s.get("u", "A")->task_summary == "changed");
    CHECK(s.size("u") == 2);
  }

  TEST_CASE("touch") {
    ConceptStore s(cap(3));
    s.upsert("u", named("A", 1));
    s.upsert("u", named("B", 2));
    const auto a = s.touch("u", "A", at(5));
    CHECK(a.last_updated == at(5));
    CHECK(s.concepts("u").back().concept_id == "A");
    CHECK_THROWS_AS(s.touch("u", "missing", at(6)), NotFoundError);
    CHECK_THROWS_AS(s.touch("nobody", "A", at(6)), NotFoundError);
  }

  TEST_CASE("TTL is strict") {
    ConceptStore s;  // 30-day default
    s.upsert("u", named("old", 0));
    s.upsert("u", named("edge", 1 * kDay));
    s.upsert("v", named("fresh", 30 * kDay));
    CHECK(ids_of(s.evict_expired(at(31 * kDay))) == std::vector<std::string>{"old"});
    CHECK(s.get("u", "edge").has_value());  // aged exactly 30 days
    CHECK(ConceptStore().evict_expired(at(0)).empty());
  }

  TEST_CASE("users are independent") {
    ConceptStore s(cap(1));
    s.upsert("u", named("A", 1));
    CHECK(s.upsert("v", named("A", 2)).empty());
    CHECK(s.size("u") == 1);
    CHECK(s.size("v") == 1);
    CHECK(s.users() == std::vector<std::string>{"u", "v"});
  }

  TEST_CASE("reactivation candidates") {
    ConceptStore s;
    IdSource ids(1);
    const auto dog = with_status(testing::dog_concept(ids), ConceptStatus::dormant, at(100));
    s.upsert("u", dog);
    s.upsert("u", named("physics", 200));
    s.upsert("u", named("live", 300, ConceptStatus::active));
    const auto c = s.find_reactivation_candidates("u", {"breed", "shortlist"});
    REQUIRE_FALSE(c.empty());
    CHECK(c.front().concept_id == dog.concept_id);
    CHECK(c.front().score > 0);
    CHECK(s.find_reactivation_candidates("u", {}).empty());
    CHECK(s.find_reactivation_candidates("nobody", {"breed"}).empty());
    CHECK(s.find_reactivation_candidates("u", {"live"}).empty());  // active entries are not candidates

    CHECK(*s.get("u", c.front().concept_id) == roundtrip_serialize(dog));
  }

  TEST_CASE("random sequences agree with the brute-force reference") {
    const auto outcome = testing::run_store_oracle(200, 10'000);
    INFO(outcome.detail);
    CHECK(outcome.ok);
  }

  TEST_CASE("config validation") {
    CHECK_THROWS_AS(ConceptStore(cap(0)), ConfigError);
  }

  TEST_CASE("persistence reload, compaction and corrupt lines") {
    TempDir dir;
    StoreConfig c = cap(2);
    c.persistence_path = dir.path;
    IdSource ids(1);
    const auto dog = with_status(testing::dog_concept(ids), ConceptStatus::dormant, at(100));
    {
      ConceptStore s(c);
      s.upsert("user/one", named("A", 1));
      s.upsert("user/one", dog);
      s.upsert("user/one", named("B", 200));  // evicts A
      s.touch("user/one", dog.concept_id, at(300));
    }
    const auto file = dir.path / ConceptStore::user_file_name("user/one");
    CHECK(file.filename() == "user%2Fone.jsonl");
    REQUIRE(fs::exists(file));
    {
      ConceptStore s(c);
      CHECK(s.size("user/one") == 2);
      CHECK_FALSE(s.get("user/one", "A").has_value());
      auto got = *s.get("user/one", dog.concept_id);
      CHECK(got.last_updated == at(300));
      got.last_updated = dog.last_updated;
      CHECK(got == dog);
      CHECK(s.concepts("user/one").back().concept_id == dog.concept_id);
    }
    {
      std::ofstream out(file, std::ios::app);
      out << "{\"concept_id\": \"trunc\n";
    }
    ConceptStore s(c);
    CHECK(s.size("user/one") == 2);
    CHECK(s.erase("user/one", "B"));
    ConceptStore again(c);
    CHECK(again.size("user/one") == 1);
  }

  TEST_CASE("concurrent users") {
    ConceptStore s(cap(4));
    std::vector<std::thread> threads;
    for (int u = 0; u < 8; ++u) {
      threads.emplace_back([&s, u] {
        for (int i = 0; i < 200; ++i) {
          s.upsert("u" + std::to_string(u), named("c" + std::to_string(i % 7), i));
        }
      });
    }
    for (auto& t : threads) t.join();
    for (int u = 0; u < 8; ++u) CHECK(s.size("u" + std::to_string(u)) == 4);
  }
}
