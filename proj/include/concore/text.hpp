#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

// Text normalization shared by concept keywords, rule triggers and extraction.
// Words are runs of ASCII letters/digits; everything else separates them.
namespace concore::text {

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

/// Lowercase, collapse whitespace, strip terminal punctuation.
std::string normalize_instruction(std::string_view s);

std::vector<std::string> words(std::string_view s);

/// " w1 w2 ... wn " so phrase lookups can match on word boundaries.
std::string padded_words(std::string_view s);

/// True if the word sequence of `phrase` occurs in `padded` (from padded_words).
bool contains_phrase(std::string_view padded, std::string_view phrase);
bool starts_with_phrase(std::string_view padded, std::string_view phrase);

bool is_stopword(std::string_view word);
std::string stem(std::string_view word);

/// Topic keywords: stemmed words of length >= 3 that are not stopwords.
std::set<std::string> keywords(std::string_view s);
void add_keywords(std::string_view s, std::set<std::string>& out);

/// Splits on '.', '!' or '?' followed by whitespace or end of text. Keeps the terminator.
std::vector<std::string> split_sentences(std::string_view s);

std::vector<std::string> split_lines(std::string_view s);

enum class SimilarityMeasure { query_coverage, jaccard };

std::string_view to_string(SimilarityMeasure m);
SimilarityMeasure similarity_from_string(std::string_view s);

/// Similarity of an instruction's keywords to a concept's keywords, in [0, 1].
/// Empty query -> 0.
double keyword_similarity(const std::set<std::string>& query,
                          const std::set<std::string>& concept_keywords,
                          SimilarityMeasure measure);

std::size_t edit_distance(std::string_view a, std::string_view b);

}  // namespace concore::text
