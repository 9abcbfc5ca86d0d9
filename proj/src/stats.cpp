#include "concore/stats.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "concore/error.hpp"

namespace concore {

using nlohmann::json;

double round1(double value) {
  const double r = std::round(value * 10.0) / 10.0;
  return r == 0.0 ? 0.0 : r;  // no "-0.0" in reports
}

namespace {

// 100 * (baseline - core) / baseline to one decimal, rounded half away from
// zero on the exact ratio (no floating-point ties).
std::optional<double> pct(std::size_t baseline, std::size_t core) {
  if (baseline == 0) return std::nullopt;
  using wide = __int128;
  const wide num = static_cast<wide>(1000) * (static_cast<wide>(baseline) - static_cast<wide>(core));
  const wide den = baseline;
  const wide mag = (2 * (num < 0 ? -num : num) + den) / (2 * den);
  const wide tenths = num < 0 ? -mag : mag;
  return tenths == 0 ? 0.0 : static_cast<double>(static_cast<long long>(tenths)) / 10.0;
}

}  // namespace

TokenStats compute_token_stats(std::span<const TurnTokens> turns) {
  TokenStats stats;
  std::size_t core_cum = 0;
  std::optional<std::size_t> base_cum = 0;
  for (std::size_t i = 0; i < turns.size(); ++i) {
    const auto& t = turns[i];
    TokenRow row;
    row.turn = i + 1;
    row.core_prompt_tokens = t.core;
    core_cum += t.core;
    row.core_cumulative = core_cum;
    row.baseline_prompt_tokens = t.baseline;
    if (t.baseline) {
      row.savings_pct = pct(*t.baseline, t.core);
      if (base_cum) *base_cum += *t.baseline;
    } else {
      base_cum.reset();
    }
    row.baseline_cumulative = base_cum;
    if (base_cum) row.cumulative_savings_pct = pct(*base_cum, core_cum);
    stats.rows.push_back(row);
  }
  return stats;
}

TokenStats replay_table1(std::span<const std::pair<std::size_t, std::size_t>> per_turn) {
  std::vector<TurnTokens> turns;
  for (std::size_t i = 0; i < per_turn.size(); ++i) {
    if (per_turn[i].first == 0) {
      throw std::invalid_argument(fmt::format("turn {}: baseline tokens must be positive", i + 1));
    }
    turns.push_back({per_turn[i].first, per_turn[i].second});
  }
  return compute_token_stats(turns);
}

ReportFormat report_format_from_string(std::string_view s) {
  if (s == "csv") return ReportFormat::csv;
  if (s == "json") return ReportFormat::json;
  throw ConfigError(fmt::format("unknown report format '{}' (csv|json)", s));
}

json token_row_to_json(const TokenRow& r) {
  auto opt = [](const auto& v) { return v ? json(*v) : json(nullptr); };
  return json{
      {"turn", r.turn},
      {"baseline_prompt_tokens", opt(r.baseline_prompt_tokens)},
      {"core_prompt_tokens", r.core_prompt_tokens},
      {"savings_pct", opt(r.savings_pct)},
      {"baseline_cumulative", opt(r.baseline_cumulative)},
      {"core_cumulative", r.core_cumulative},
      {"cumulative_savings_pct", opt(r.cumulative_savings_pct)},
  };
}

std::string write_report(const TokenStats& stats, ReportFormat format) {
  if (format == ReportFormat::csv) {
    std::string out =
        "Turn,Baseline Prompt Tokens,CORE Prompt Tokens,Savings %,Baseline Cumulative Tokens,CORE Cumulative "
        "Tokens,Cumulative Savings %\n";
    auto num = [](const std::optional<std::size_t>& v) { return v ? std::to_string(*v) : std::string(); };
    auto dec = [](const std::optional<double>& v) { return v ? fmt::format("{:.1f}", *v) : std::string(); };
    for (const auto& r : stats.rows) {
      out += fmt::format("{},{},{},{},{},{},{}\n", r.turn, num(r.baseline_prompt_tokens), r.core_prompt_tokens,
                         dec(r.savings_pct), num(r.baseline_cumulative), r.core_cumulative,
                         dec(r.cumulative_savings_pct));
    }
    return out;
  }

  json rows = json::array();
  json base_series = json::array();
  json core_series = json::array();
  for (const auto& r : stats.rows) {
    rows.push_back(token_row_to_json(r));
    base_series.push_back(r.baseline_cumulative ? json(*r.baseline_cumulative) : json(nullptr));
    core_series.push_back(r.core_cumulative);
  }
  const json doc = {
      {"note", kReportNote},
      {"rows", rows},
      {"series", {{"baseline_cumulative", base_series}, {"core_cumulative", core_series}}},
  };
  return doc.dump(2) + "\n";
}

}  // namespace concore
