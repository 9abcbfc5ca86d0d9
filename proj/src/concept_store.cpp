#include "concore/concept_store.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <tuple>

#include <fmt/format.h>

#include "concore/error.hpp"

namespace concore {

namespace fs = std::filesystem;

void StoreConfig::validate() const {
  if (capacity_per_user < 1) throw ConfigError("store capacity must be >= 1");
  if (ttl <= std::chrono::seconds::zero()) throw ConfigError("store ttl must be positive");
}

namespace {

constexpr std::string_view kSuffix = ".jsonl";

bool plain_char(unsigned char c) { return std::isalnum(c) || c == '-' || c == '_'; }

std::optional<std::string> decode_user(std::string_view name) {
  if (!name.ends_with(kSuffix)) return std::nullopt;
  name.remove_suffix(kSuffix.size());
  std::string out;
  for (std::size_t i = 0; i < name.size(); ++i) {
    if (name[i] != '%') {
      out += name[i];
      continue;
    }
    if (i + 2 >= name.size()) return std::nullopt;
    const auto hex = std::string(name.substr(i + 1, 2));
    if (!std::isxdigit(static_cast<unsigned char>(hex[0])) || !std::isxdigit(static_cast<unsigned char>(hex[1]))) {
      return std::nullopt;
    }
    out += static_cast<char>(std::stoi(hex, nullptr, 16));
    i += 2;
  }
  return out;
}

}  // namespace

std::string ConceptStore::user_file_name(const std::string& user_id) {
  std::string out;
  for (unsigned char c : user_id) {
    if (plain_char(c)) {
      out += static_cast<char>(c);
    } else {
      out += fmt::format("%{:02X}", c);
    }
  }
  return out + std::string(kSuffix);
}

ConceptStore::ConceptStore(StoreConfig config) : config_(std::move(config)) {
  config_.validate();
  if (config_.persistence_path) load_persisted();
}

ConceptStore::~ConceptStore() = default;

std::shared_ptr<ConceptStore::Shard> ConceptStore::shard(const std::string& user_id, bool create) const {
  {
    std::shared_lock lock(shards_mu_);
    auto it = shards_.find(user_id);
    if (it != shards_.end()) return it->second;
  }
  if (!create) return nullptr;
  std::unique_lock lock(shards_mu_);
  auto& slot = shards_[user_id];
  if (!slot) slot = std::make_shared<Shard>();
  return slot;
}

std::uint64_t ConceptStore::next_seq() {
  std::lock_guard lock(seq_mu_);
  return ++seq_;
}

void ConceptStore::append_line(const std::string& user_id, const LocalConcept& lc) const {
  if (!config_.persistence_path) return;
  const fs::path file = *config_.persistence_path / user_file_name(user_id);
  std::ofstream out(file, std::ios::app | std::ios::binary);
  out << serialize_concept(lc) << '\n';
  out.flush();
  if (!out) throw PersistenceError(fmt::format("cannot append to {}", file.string()));
}

namespace {

// Least recent first.
template <typename Map>
std::vector<const typename Map::mapped_type*> by_recency(const Map& entries) {
  std::vector<const typename Map::mapped_type*> out;
  out.reserve(entries.size());
  for (const auto& [id, e] : entries) out.push_back(&e);
  std::sort(out.begin(), out.end(), [](const auto* a, const auto* b) {
    return std::tie(a->value.last_updated, a->seq) < std::tie(b->value.last_updated, b->seq);
  });
  return out;
}

}  // namespace

void ConceptStore::rewrite_file(const std::string& user_id, const Shard& shard) const {
  if (!config_.persistence_path) return;
  const fs::path file = *config_.persistence_path / user_file_name(user_id);
  const fs::path tmp = fs::path(file).concat(".tmp");
  {
    std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
    // Written in use order so a reload reproduces the recency ranking.
    std::vector<const Entry*> order;
    for (const auto& [id, e] : shard.entries) order.push_back(&e);
    std::sort(order.begin(), order.end(), [](const Entry* a, const Entry* b) { return a->seq < b->seq; });
    for (const auto* e : order) out << serialize_concept(e->value) << '\n';
    out.flush();
    if (!out) throw PersistenceError(fmt::format("cannot write {}", tmp.string()));
  }
  std::error_code ec;
  fs::rename(tmp, file, ec);
  if (ec) throw PersistenceError(fmt::format("cannot replace {}: {}", file.string(), ec.message()));
}

void ConceptStore::load_persisted() {
  const fs::path& dir = *config_.persistence_path;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw PersistenceError(fmt::format("cannot create {}: {}", dir.string(), ec.message()));

  std::vector<fs::path> files;
  for (const auto& de : fs::directory_iterator(dir)) {
    if (de.is_regular_file() && de.path().extension() == kSuffix) files.push_back(de.path());
  }
  std::sort(files.begin(), files.end());

  for (const auto& file : files) {
    const auto user = decode_user(file.filename().string());
    if (!user) continue;
    auto sh = shard(*user, true);
    std::ifstream in(file, std::ios::binary);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      try {
        LocalConcept lc = parse_concept(line);
        const auto id = lc.concept_id;
        sh->entries[id] = Entry{std::move(lc), next_seq()};
      } catch (const ParseError&) {
        // A torn final write; the rest of the file is still usable.
      }
    }
    bool trimmed = false;
    while (sh->entries.size() > config_.capacity_per_user) {
      const auto order = by_recency(sh->entries);
      sh->entries.erase(order.front()->value.concept_id);
      trimmed = true;
    }
    if (trimmed) rewrite_file(*user, *sh);
  }
}

std::vector<EvictedEntry> ConceptStore::upsert(const std::string& user_id, const LocalConcept& lc) {
  auto sh = shard(user_id, true);
  std::lock_guard lock(sh->mu);
  sh->entries[lc.concept_id] = Entry{lc, next_seq()};

  std::vector<EvictedEntry> evicted;
  while (sh->entries.size() > config_.capacity_per_user) {
    for (const auto* e : by_recency(sh->entries)) {
      if (e->value.concept_id == lc.concept_id) continue;
      evicted.push_back({user_id, e->value.concept_id});
      sh->entries.erase(e->value.concept_id);
      break;
    }
  }
  if (evicted.empty()) {
    append_line(user_id, lc);
  } else {
    rewrite_file(user_id, *sh);
  }
  return evicted;
}

LocalConcept ConceptStore::touch(const std::string& user_id, const std::string& concept_id, Timestamp now) {
  auto sh = shard(user_id, false);
  if (!sh) throw NotFoundError(fmt::format("no concept {} for user {}", concept_id, user_id));
  std::lock_guard lock(sh->mu);
  auto it = sh->entries.find(concept_id);
  if (it == sh->entries.end()) throw NotFoundError(fmt::format("no concept {} for user {}", concept_id, user_id));
  it->second.value.last_updated = now;
  it->second.seq = next_seq();
  append_line(user_id, it->second.value);
  return it->second.value;
}

std::vector<EvictedEntry> ConceptStore::evict_expired(Timestamp now) {
  struct Hit {
    Timestamp at;
    std::uint64_t seq;
    EvictedEntry entry;
  };
  std::vector<Hit> hits;
  std::vector<std::pair<std::string, std::shared_ptr<Shard>>> all;
  {
    std::shared_lock lock(shards_mu_);
    all.assign(shards_.begin(), shards_.end());
  }
  for (auto& [user, sh] : all) {
    std::lock_guard lock(sh->mu);
    bool changed = false;
    for (auto it = sh->entries.begin(); it != sh->entries.end();) {
      if (now - it->second.value.last_updated > config_.ttl) {
        hits.push_back({it->second.value.last_updated, it->second.seq, {user, it->first}});
        it = sh->entries.erase(it);
        changed = true;
      } else {
        ++it;
      }
    }
    if (changed) rewrite_file(user, *sh);
  }
  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) { return std::tie(a.at, a.seq) < std::tie(b.at, b.seq); });
  std::vector<EvictedEntry> out;
  out.reserve(hits.size());
  for (auto& h : hits) out.push_back(std::move(h.entry));
  return out;
}

std::vector<ReactivationCandidate> ConceptStore::find_reactivation_candidates(const std::string& user_id,
                                                                              const std::set<std::string>& keywords,
                                                                              text::SimilarityMeasure measure) const {
  struct Scored {
    ReactivationCandidate c;
    Timestamp at;
  };
  std::vector<Scored> scored;
  for (const auto& lc : dormant_concepts(user_id)) {
    const double s = text::keyword_similarity(keywords, lc.topic_keywords, measure);
    if (s > 0.0) scored.push_back({{lc.concept_id, s}, lc.last_updated});
  }
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.c.score != b.c.score) return a.c.score > b.c.score;
    if (a.at != b.at) return a.at > b.at;
    return a.c.concept_id < b.c.concept_id;
  });
  std::vector<ReactivationCandidate> out;
  for (auto& s : scored) out.push_back(std::move(s.c));
  return out;
}

std::optional<LocalConcept> ConceptStore::get(const std::string& user_id, const std::string& concept_id) const {
  auto sh = shard(user_id, false);
  if (!sh) return std::nullopt;
  std::lock_guard lock(sh->mu);
  auto it = sh->entries.find(concept_id);
  if (it == sh->entries.end()) return std::nullopt;
  return it->second.value;
}

bool ConceptStore::erase(const std::string& user_id, const std::string& concept_id) {
  auto sh = shard(user_id, false);
  if (!sh) return false;
  std::lock_guard lock(sh->mu);
  if (sh->entries.erase(concept_id) == 0) return false;
  rewrite_file(user_id, *sh);
  return true;
}

std::vector<LocalConcept> ConceptStore::concepts(const std::string& user_id) const {
  auto sh = shard(user_id, false);
  if (!sh) return {};
  std::lock_guard lock(sh->mu);
  std::vector<LocalConcept> out;
  for (const auto* e : by_recency(sh->entries)) out.push_back(e->value);
  return out;
}

std::vector<LocalConcept> ConceptStore::dormant_concepts(const std::string& user_id) const {
  auto all = concepts(user_id);
  std::erase_if(all, [](const LocalConcept& lc) { return lc.status != ConceptStatus::dormant; });
  return all;
}

std::size_t ConceptStore::size(const std::string& user_id) const {
  auto sh = shard(user_id, false);
  if (!sh) return 0;
  std::lock_guard lock(sh->mu);
  return sh->entries.size();
}

std::vector<std::string> ConceptStore::users() const {
  std::shared_lock lock(shards_mu_);
  std::vector<std::string> out;
  for (const auto& [user, sh] : shards_) out.push_back(user);
  return out;
}

}  // namespace concore
