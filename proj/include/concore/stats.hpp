#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace concore {

struct TurnTokens {
  std::optional<std::size_t> baseline;  // absent when no shadow baseline ran
  std::size_t core = 0;
};

struct TokenRow {
  std::size_t turn = 0;
  std::optional<std::size_t> baseline_prompt_tokens;
  std::size_t core_prompt_tokens = 0;
  std::optional<double> savings_pct;
  std::optional<std::size_t> baseline_cumulative;  // only while every turn so far has a baseline
  std::size_t core_cumulative = 0;
  std::optional<double> cumulative_savings_pct;
};

struct TokenStats {
  std::vector<TokenRow> rows;
};

/// Half away from zero, one decimal.
double round1(double value);

TokenStats compute_token_stats(std::span<const TurnTokens> turns);

/// Derived columns from (baseline, core) pairs. Throws std::invalid_argument
/// on a nonpositive baseline.
TokenStats replay_table1(std::span<const std::pair<std::size_t, std::size_t>> per_turn);

enum class ReportFormat { csv, json };

ReportFormat report_format_from_string(std::string_view s);

/// CSV has one row per turn with the seven token columns; JSON carries the rows plus
/// plotting series.
std::string write_report(const TokenStats& stats, ReportFormat format);

nlohmann::json token_row_to_json(const TokenRow& row);

inline constexpr const char* kReportNote =
    "Token counts are whitespace-delimited runs. Absolute values are not comparable to a "
    "model tokenizer; compare shape and ratios.";

}  // namespace concore
