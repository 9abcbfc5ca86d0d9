#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

#include "concore/backend.hpp"
#include "concore/bench.hpp"
#include "concore/concept_store.hpp"
#include "concore/data.hpp"
#include "concore/error.hpp"
#include "concore/session.hpp"

namespace concore::testing {

inline std::shared_ptr<const TurnInterpreter> shipped_interpreter() {
  static const auto interp = load_interpreter(DataPaths::in(default_data_dir()));
  return interp;
}

inline MockTemplates shipped_templates() {
  return MockTemplates::load_file(DataPaths::in(default_data_dir()).templates);
}

inline BenchContext bench_context() {
  BenchContext ctx;
  ctx.interpreter = shipped_interpreter();
  ctx.templates = shipped_templates();
  return ctx;
}

inline Scenario shipped_scenario(std::string_view name) { return load_scenario(scenario_path(name)); }

inline Timestamp at(std::int64_t seconds) { return default_epoch() + std::chrono::seconds{seconds}; }

/// Concept state after the dog-breed script's third turn.
inline LocalConcept dog_concept(IdSource& ids) {
  auto lc = new_concept("select suitable dog breed for family with small children", at(0), ids);
  ConceptUpdate u;
  u.add_constraints = {{"housing", "apartment-friendly"}, {"coat", "low shedding"}};
  u.set_intermediate = {{"GENERATE_VARIANTS_result", "Shortlisted breeds: Beagle, Labrador Retriever, Poodle"},
                        {"HIGHLIGHT_CONSTRAINTS_result", "Refined shortlist: Poodle, Miniature Schnauzer"}};
  return apply_update(lc, u, at(60));
}

/// Wraps another backend and appends a per-turn sentinel line to every
/// response, so the sentinel enters history but must never reach a packet.
class SentinelBackend final : public ModelBackend {
 public:
  SentinelBackend(std::shared_ptr<ModelBackend> inner, std::vector<std::string> sentinels)
      : inner_(std::move(inner)), sentinels_(std::move(sentinels)) {}

  std::string generate(const ConceptPacket& packet, const GenerationHints& hints) override {
    std::lock_guard lock(mu_);
    std::string text = inner_->generate(packet, hints);
    if (calls_ < sentinels_.size() && !sentinels_[calls_].empty()) text += "\nTrace " + sentinels_[calls_];
    ++calls_;
    return text;
  }

 private:
  std::mutex mu_;
  std::shared_ptr<ModelBackend> inner_;
  std::vector<std::string> sentinels_;
  std::size_t calls_ = 0;
};

class FailingBackend final : public ModelBackend {
 public:
  std::string generate(const ConceptPacket&, const GenerationHints&) override {
    throw BackendError("upstream unavailable");
  }
};

/// Blocks inside generate() until released; lets tests hold a turn in flight.
class GateBackend final : public ModelBackend {
 public:
  explicit GateBackend(std::shared_ptr<ModelBackend> inner) : inner_(std::move(inner)) {}

  std::string generate(const ConceptPacket& packet, const GenerationHints& hints) override {
    std::unique_lock lock(mu_);
    entered_ = true;
    cv_.notify_all();
    cv_.wait(lock, [&] { return released_; });
    return inner_->generate(packet, hints);
  }
  void wait_entered() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return entered_; });
  }
  void release() {
    std::lock_guard lock(mu_);
    released_ = true;
    cv_.notify_all();
  }

 private:
  std::shared_ptr<ModelBackend> inner_;
  std::mutex mu_;
  std::condition_variable cv_;
  bool entered_ = false;
  bool released_ = false;
};

// ---------------------------------------------------------------------------
// Brute-force LRU + TTL reference store. A flat list scanned linearly; no
// shared code with ConceptStore.

struct RefEntry {
  std::string user;
  std::string id;
  std::int64_t t = 0;    // last use, seconds
  std::uint64_t use = 0;  // global use counter
};

class ReferenceStore {
 public:
  ReferenceStore(std::size_t capacity, std::int64_t ttl) : capacity_(capacity), ttl_(ttl) {}

  std::vector<EvictedEntry> upsert(const std::string& user, const std::string& id, std::int64_t t) {
    bool found = false;
    for (auto& e : entries_) {
      if (e.user == user && e.id == id) {
        e.t = t;
        e.use = ++uses_;
        found = true;
      }
    }
    if (!found) entries_.push_back({user, id, t, ++uses_});
    std::vector<EvictedEntry> out;
    while (count(user) > capacity_) {
      std::size_t victim = entries_.size();
      for (std::size_t i = 0; i < entries_.size(); ++i) {
        const auto& e = entries_[i];
        if (e.user != user || e.id == id) continue;
        if (victim == entries_.size() || older(e, entries_[victim])) victim = i;
      }
      out.push_back({user, entries_[victim].id});
      entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(victim));
    }
    return out;
  }

  /// False when absent.
  bool touch(const std::string& user, const std::string& id, std::int64_t t) {
    for (auto& e : entries_) {
      if (e.user == user && e.id == id) {
        e.t = t;
        e.use = ++uses_;
        return true;
      }
    }
    return false;
  }

  std::vector<EvictedEntry> evict_expired(std::int64_t now) {
    std::vector<RefEntry> expired;
    std::vector<RefEntry> kept;
    for (const auto& e : entries_) (now - e.t > ttl_ ? expired : kept).push_back(e);
    std::sort(expired.begin(), expired.end(), older);
    entries_ = kept;
    std::vector<EvictedEntry> out;
    for (const auto& e : expired) out.push_back({e.user, e.id});
    return out;
  }

  std::size_t count(const std::string& user) const {
    return static_cast<std::size_t>(std::count_if(entries_.begin(), entries_.end(),
                                                  [&](const RefEntry& e) { return e.user == user; }));
  }

  /// Ids of one user, least recent first.
  std::vector<std::string> order(const std::string& user) const {
    std::vector<RefEntry> mine;
    for (const auto& e : entries_) {
      if (e.user == user) mine.push_back(e);
    }
    std::sort(mine.begin(), mine.end(), older);
    std::vector<std::string> ids;
    for (const auto& e : mine) ids.push_back(e.id);
    return ids;
  }

 private:
  static bool older(const RefEntry& a, const RefEntry& b) { return std::tie(a.t, a.use) < std::tie(b.t, b.use); }

  std::size_t capacity_;
  std::int64_t ttl_;
  std::vector<RefEntry> entries_;
  std::uint64_t uses_ = 0;
};

struct OracleOutcome {
  bool ok = true;
  std::string detail;
  std::size_t operations = 0;
};

/// One random operation sequence run against both stores in lockstep.
OracleOutcome run_store_oracle_sequence(std::uint64_t seed);

/// `sequences` sequences from consecutive seeds; stops at the first mismatch.
OracleOutcome run_store_oracle(std::size_t sequences, std::uint64_t first_seed = 1);

}  // namespace concore::testing
