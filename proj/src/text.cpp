#include "concore/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "concore/error.hpp"

namespace concore::text {

namespace {

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

// Sorted for binary search.
constexpr std::array<std::string_view, 139> kStopwords = {
    "about",   "above",   "after",   "again",   "against", "all",     "also",    "and",
    "another", "any",     "are",     "around",  "back",    "been",    "before",  "being",
    "below",   "between", "both",    "but",     "can",     "could",   "did",     "does",
    "doing",   "done",    "down",    "during",  "each",    "earlier", "either",  "else",
    "even",    "ever",    "every",   "few",     "for",     "from",    "further", "get",
    "gets",    "give",    "going",   "got",     "had",     "has",     "have",    "having",
    "her",     "here",    "hers",    "him",     "his",     "how",     "into",    "its",
    "itself",  "just",    "know",    "last",    "later",   "let",     "like",    "make",
    "many",    "may",     "might",   "more",    "most",    "much",    "must",    "need",
    "nor",     "not",     "now",     "off",     "okay",    "once",    "one",     "only",
    "other",   "our",     "ours",    "out",     "over",    "own",     "please",  "really",
    "said",    "same",    "say",     "see",     "she",     "should",  "some",    "such",
    "sure",    "tell",    "than",    "thank",   "thanks",  "that",    "the",     "their",
    "them",    "then",    "there",   "these",   "they",    "thing",   "this",    "those",
    "through", "too",     "under",   "until",   "upon",    "use",     "very",    "want",
    "was",     "way",     "well",    "were",    "what",    "when",    "where",   "which",
    "while",   "who",     "whom",    "why",     "will",    "with",    "would",   "yes",
    "yet",     "you",     "your",
};

}  // namespace

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::string normalize_instruction(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  while (!out.empty() && std::string_view(".!?,;: ").find(out.back()) != std::string_view::npos) {
    out.pop_back();
  }
  return out;
}

std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (is_word_char(c)) {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::string padded_words(std::string_view s) {
  std::string out = " ";
  for (const auto& w : words(s)) {
    out += w;
    out += ' ';
  }
  return out;
}

bool contains_phrase(std::string_view padded, std::string_view phrase) {
  const std::string needle = padded_words(phrase);
  if (needle.size() <= 1) return false;
  return padded.find(needle) != std::string_view::npos;
}

bool starts_with_phrase(std::string_view padded, std::string_view phrase) {
  const std::string needle = padded_words(phrase);
  if (needle.size() <= 1) return false;
  return padded.starts_with(needle);
}

bool is_stopword(std::string_view word) {
  return std::binary_search(kStopwords.begin(), kStopwords.end(), word);
}

std::string stem(std::string_view word) {
  if (word.size() > 3 && word.back() == 's') {
    const char prev = word[word.size() - 2];
    if (prev != 's' && prev != 'u' && prev != 'i') return std::string(word.substr(0, word.size() - 1));
  }
  return std::string(word);
}

void add_keywords(std::string_view s, std::set<std::string>& out) {
  for (const auto& w : words(s)) {
    if (w.size() < 3 || is_stopword(w)) continue;
    out.insert(stem(w));
  }
}

std::set<std::string> keywords(std::string_view s) {
  std::set<std::string> out;
  add_keywords(s, out);
  return out;
}

std::vector<std::string> split_sentences(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c != '.' && c != '!' && c != '?') continue;
    std::size_t j = i + 1;
    while (j < s.size() && (s[j] == '.' || s[j] == '!' || s[j] == '?')) ++j;
    if (j == s.size() || is_space(s[j])) {
      auto sentence = trim(s.substr(start, j - start));
      if (!sentence.empty()) out.push_back(std::move(sentence));
      start = j;
    }
    i = j - 1;
  }
  auto tail = trim(s.substr(std::min(start, s.size())));
  if (!tail.empty()) out.push_back(std::move(tail));
  return out;
}

std::vector<std::string> split_lines(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto nl = s.find('\n', start);
    auto line = s.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.emplace_back(line);
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return out;
}

std::string_view to_string(SimilarityMeasure m) {
  return m == SimilarityMeasure::jaccard ? "jaccard" : "coverage";
}

SimilarityMeasure similarity_from_string(std::string_view s) {
  if (s == "jaccard") return SimilarityMeasure::jaccard;
  if (s == "coverage") return SimilarityMeasure::query_coverage;
  throw ConfigError("unknown similarity measure: " + std::string(s));
}

double keyword_similarity(const std::set<std::string>& query, const std::set<std::string>& concept_keywords,
                          SimilarityMeasure measure) {
  if (query.empty()) return 0.0;
  std::size_t shared = 0;
  for (const auto& k : query) shared += concept_keywords.count(k);
  if (measure == SimilarityMeasure::query_coverage) {
    return static_cast<double>(shared) / static_cast<double>(query.size());
  }
  const std::size_t uni = query.size() + concept_keywords.size() - shared;
  return uni == 0 ? 0.0 : static_cast<double>(shared) / static_cast<double>(uni);
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

}  // namespace concore::text
