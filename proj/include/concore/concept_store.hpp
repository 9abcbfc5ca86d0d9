#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include "concore/concept.hpp"
#include "concore/text.hpp"

namespace concore {

struct StoreConfig {
  std::size_t capacity_per_user = 32;
  std::chrono::seconds ttl = std::chrono::days{30};
  std::optional<std::filesystem::path> persistence_path;

  void validate() const;
};

struct EvictedEntry {
  std::string user_id;
  std::string concept_id;

  friend bool operator==(const EvictedEntry&, const EvictedEntry&) = default;
};

struct ReactivationCandidate {
  std::string concept_id;
  double score = 0.0;
};

/// Warm retention store: per-user, capacity-bounded (LRU on last use) and
/// TTL-bounded collection of Local Concepts.
///
/// Recency is (last_updated, use sequence); a use is an upsert or a touch.
/// Operations on one user are serialized; different users proceed in
/// parallel. With a persistence path, each user's concepts live in
/// `<path>/<user>.jsonl` (append on write, compacted on eviction) and are
/// reloaded on construction.
class ConceptStore {
 public:
  explicit ConceptStore(StoreConfig config = {});
  ~ConceptStore();

  ConceptStore(const ConceptStore&) = delete;
  ConceptStore& operator=(const ConceptStore&) = delete;

  /// Stores or replaces `lc`; evicts least-recent entries beyond capacity,
  /// never `lc` itself.
  std::vector<EvictedEntry> upsert(const std::string& user_id, const LocalConcept& lc);

  /// Throws NotFoundError.
  LocalConcept touch(const std::string& user_id, const std::string& concept_id, Timestamp now);

  /// Removes every entry with now - last_updated > ttl.
  std::vector<EvictedEntry> evict_expired(Timestamp now);

  /// Dormant concepts with nonzero score, best first (score, then most recent).
  std::vector<ReactivationCandidate> find_reactivation_candidates(
      const std::string& user_id, const std::set<std::string>& keywords,
      text::SimilarityMeasure measure = text::SimilarityMeasure::query_coverage) const;

  std::optional<LocalConcept> get(const std::string& user_id, const std::string& concept_id) const;
  bool erase(const std::string& user_id, const std::string& concept_id);

  /// Least recent first.
  std::vector<LocalConcept> concepts(const std::string& user_id) const;
  std::vector<LocalConcept> dormant_concepts(const std::string& user_id) const;
  std::size_t size(const std::string& user_id) const;
  std::vector<std::string> users() const;

  const StoreConfig& config() const noexcept { return config_; }

  /// File name used for a user id (percent-encoded).
  static std::string user_file_name(const std::string& user_id);

 private:
  struct Entry {
    LocalConcept value;
    std::uint64_t seq = 0;
  };
  struct Shard {
    mutable std::mutex mu;
    std::map<std::string, Entry> entries;  // by concept id
  };

  std::shared_ptr<Shard> shard(const std::string& user_id, bool create) const;
  std::uint64_t next_seq();
  void append_line(const std::string& user_id, const LocalConcept& lc) const;
  void rewrite_file(const std::string& user_id, const Shard& shard) const;
  void load_persisted();

  StoreConfig config_;
  mutable std::shared_mutex shards_mu_;
  mutable std::map<std::string, std::shared_ptr<Shard>> shards_;
  std::mutex seq_mu_;
  std::uint64_t seq_ = 0;
};

}  // namespace concore
