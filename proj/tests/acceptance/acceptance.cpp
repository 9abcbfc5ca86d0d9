// One line per acceptance criterion; exit status is the number of failures.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "concore/bench.hpp"
#include "concore/data.hpp"
#include "concore/operator_library.hpp"
#include "concore/stats.hpp"
#include "support.hpp"

using namespace concore;

namespace {

struct Verdict {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

using Check = std::function<Verdict()>;

struct Criterion {
  std::string name;
  double limit_s;  // 0 = no runtime limit
  Check check;
};

bool near(std::optional<double> got, double want) { return got && std::fabs(*got - want) <= 0.1 + 1e-9; }

// Published per-turn and cumulative savings for the ten reference turns.
const std::vector<double> kSavings = {-72.2, -16.1, 5.5, 24.1, 35.8, 47.4, 52.6, 57.8, 61.9, 64.9};
const std::vector<double> kCumSavings = {-72.2, -39.7, -20.1, -4.6, 7.4, 17.7, 25.6, 32.1, 37.6, 42.2};
const std::vector<std::size_t> kCumBaseline = {90, 214, 378, 581, 827, 1114, 1441, 1808, 2215, 2665};
const std::vector<std::size_t> kCumCore = {155, 299, 454, 608, 766, 917, 1072, 1227, 1382, 1540};

Verdict table1_replay() {
  Verdict v;
  const auto sc = testing::shipped_scenario("table1_replay");
  const auto stats = replay_table1(sc.per_turn);
  v.require(stats.rows.size() == 10, "expected 10 rows");
  for (std::size_t i = 0; v.ok && i < 10; ++i) {
    const auto& r = stats.rows[i];
    v.require(near(r.savings_pct, kSavings[i]), fmt::format("turn {} savings", i + 1));
    v.require(near(r.cumulative_savings_pct, kCumSavings[i]), fmt::format("turn {} cumulative savings", i + 1));
    v.require(r.baseline_cumulative == kCumBaseline[i] && r.core_cumulative == kCumCore[i],
              fmt::format("turn {} cumulative totals", i + 1));
  }
  if (v.ok) v.detail = "savings -72.2..64.9, cumulative -72.2..42.2";
  return v;
}

Verdict structural_efficiency() {
  Verdict v;
  const auto run = run_scenario(testing::shipped_scenario("synthetic_10"), testing::bench_context());
  const auto& rows = run.stats.rows;
  v.require(rows.size() == 10, "expected 10 turns");
  if (!v.ok) return v;
  std::size_t lo = SIZE_MAX;
  std::size_t hi = 0;
  double sum = 0;
  for (std::size_t i = 1; i < 10; ++i) {
    lo = std::min(lo, rows[i].core_prompt_tokens);
    hi = std::max(hi, rows[i].core_prompt_tokens);
    sum += static_cast<double>(rows[i].core_prompt_tokens);
  }
  const double mean = sum / 9.0;
  v.require(static_cast<double>(hi - lo) <= 0.2 * mean,
            fmt::format("(a) CORE turns 2-10 span {}..{} vs mean {:.1f}", lo, hi, mean));
  for (std::size_t i = 1; i < 10; ++i) {
    v.require(*rows[i].baseline_prompt_tokens > *rows[i - 1].baseline_prompt_tokens,
              fmt::format("(b) baseline not increasing at turn {}", i + 1));
  }
  v.require(*rows[6].cumulative_savings_pct > 0, "(c) cumulative savings not positive by turn 7");
  v.require(*rows[9].cumulative_savings_pct > 25.0,
            fmt::format("(c) turn-10 cumulative savings {:.1f}%", *rows[9].cumulative_savings_pct));
  if (v.ok) {
    v.detail = fmt::format("CORE {}..{} (mean {:.1f}), cumulative savings t7 {:.1f}% t10 {:.1f}%", lo, hi, mean,
                           *rows[6].cumulative_savings_pct, *rows[9].cumulative_savings_pct);
  }
  return v;
}

Verdict fifty_turns() {
  Verdict v;
  const auto sc = testing::shipped_scenario("synthetic_50");
  const auto ctx = testing::bench_context();
  std::vector<std::string> sentinels;
  for (const auto& t : sc.turns) sentinels.push_back(t.sentinel.value_or(""));
  auto backend = std::make_shared<testing::SentinelBackend>(
      std::make_shared<MockBackend>(ctx.templates.with_overrides(sc.mock_templates)), sentinels);
  const auto run = run_scenario(sc, ctx, backend);
  v.require(run.records.size() == 50, "expected 50 turns");
  if (!v.ok) return v;

  std::size_t max_core = 0;
  for (const auto& r : run.records) max_core = std::max(max_core, r.packet.token_count);
  v.require(max_core <= ctx.config.budget.packet_budget, fmt::format("max CORE packet {} tokens", max_core));

  const auto& last = run.stats.rows.back();
  const double ratio = static_cast<double>(*last.baseline_cumulative) / static_cast<double>(last.core_cumulative);
  v.require(ratio >= 3.0, fmt::format("cumulative ratio {:.2f}", ratio));

  std::size_t seeded = 0;
  for (std::size_t i = 0; i < run.records.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (sentinels[j].empty()) continue;
      v.require(run.records[i].packet.rendered_text.find(sentinels[j]) == std::string::npos,
                fmt::format("sentinel of turn {} leaked into packet {}", j + 1, i + 1));
    }
  }
  for (const auto& s : sentinels) seeded += !s.empty();
  v.require(seeded == 50, "scenario must carry a sentinel on every turn");
  if (v.ok) {
    v.detail = fmt::format("max CORE {} <= {}, cumulative {} vs {} ({:.1f}x), {} sentinels absent", max_core,
                           ctx.config.budget.packet_budget, *last.baseline_cumulative, last.core_cumulative, ratio,
                           seeded);
  }
  return v;
}

const OrderedMap kDogConstraints = {{"housing", "apartment-friendly"}, {"coat", "low shedding"}};

Verdict worked_examples() {
  Verdict v;
  const auto ctx = testing::bench_context();

  const auto a = run_scenario(testing::shipped_scenario("appendix_3_1"), ctx);
  v.require(a.records.size() == 3, "dog script: 3 turns");
  if (!v.ok) return v;
  v.require(a.records[2].concept_after.constraints == kDogConstraints, "dog script: constraints");
  v.require(a.records[2].operator_id.str() == "CONTRAST_CONCEPTS", "dog script: comparison operator at turn 3");

  const auto b = run_scenario(testing::shipped_scenario("appendix_3_2"), ctx);
  v.require(b.records.size() == 6, "topic-switch script: 6 turns");
  if (!v.ok) return v;
  const auto& parked = b.records[2].concept_after;
  v.require(b.records[3].topic_decision.kind == TopicKind::switch_new, "topic-switch script: switch at turn 4");
  v.require(b.records[3].concept_before.concept_id != parked.concept_id, "topic-switch script: new concept");
  const auto& back = b.records[5];
  v.require(back.topic_decision.kind == TopicKind::reactivate &&
                back.topic_decision.target_concept_id == parked.concept_id,
            "topic-switch script: reactivation at turn 6");
  auto restored = back.concept_before;
  v.require(restored.status == ConceptStatus::active, "reactivated concept is active");
  restored.last_updated = parked.last_updated;
  v.require(serialize_concept(restored) == serialize_concept(parked), "reactivated concept differs from parked");
  const auto* shortlist = back.concept_after.intermediate_results.find("HIGHLIGHT_CONSTRAINTS_result");
  v.require(shortlist && shortlist->find("Poodle, Miniature Schnauzer") != std::string::npos, "shortlist lost");
  v.require(back.concept_after.constraints == kDogConstraints, "constraints lost on reactivation");

  const auto c = run_scenario(testing::shipped_scenario("appendix_3_3"), ctx);
  v.require(c.records.size() == 3, "business-plan script: 3 turns");
  if (!v.ok) return v;
  v.require(c.records[1].operator_id.str() == "ELABORATE", "business-plan script: ELABORATE at turn 2");
  const auto* spec = ctx.interpreter->library().find(c.records[2].operator_id);
  v.require(spec && spec->family == OperatorFamily::evaluation_verification,
            "business-plan script: evaluation-family operator at turn 3");
  if (v.ok) v.detail = "dog script, topic switch + byte-faithful reactivation, business plan";
  return v;
}

Verdict operator_library() {
  Verdict v;
  const auto lib = OperatorLibrary::load_file(DataPaths::in(default_data_dir()).operators);
  v.require(lib.size() == 40, fmt::format("{} operators", lib.size()));
  for (auto family : kAllFamilies) {
    v.require(lib.members(family).size() == 8, fmt::format("family {} size", family_name(family)));
  }
  for (const auto& [id, spec] : lib.operators()) v.require(validate_spec(spec).ok(), id.str() + " invalid");
  LocalConcept one;
  one.intermediate_results.upsert("only", "item");
  const auto report = check_input_requirements(lib.get(lib.resolve_alias("COMPARE")), one);
  v.require(report.failed == std::vector<std::string>{"intermediate_results must contain >= 2 items"},
            "COMPARE with one intermediate item");
  if (v.ok) v.detail = "40 operators, 5 families x 8, all valid, COMPARE requirement enforced";
  return v;
}

Verdict store_oracle() {
  Verdict v;
  const auto outcome = testing::run_store_oracle(1000);
  v.require(outcome.ok, outcome.detail);
  if (v.ok) v.detail = fmt::format("1000 sequences, {} operations, identical evictions", outcome.operations);
  return v;
}

Verdict determinism() {
  Verdict v;
  const char* names[] = {"appendix_3_1", "appendix_3_2", "appendix_3_3", "synthetic_10", "synthetic_50", "table1_replay"};
  for (const char* name : names) {
    const auto sc = testing::shipped_scenario(name);
    auto once = [&] {
      std::string out;
      if (sc.is_replay()) {
        const auto stats = replay_table1(sc.per_turn);
        return write_report(stats, ReportFormat::csv) + write_report(stats, ReportFormat::json);
      }
      const auto run = run_scenario(sc, testing::bench_context());
      return records_to_jsonl(run.records) + write_report(run.stats, ReportFormat::csv) +
             write_report(run.stats, ReportFormat::json);
    };
    v.require(once() == once(), fmt::format("{} differs between runs", name));
  }
  if (v.ok) v.detail = "6 scenarios, records and reports byte-identical";
  return v;
}

Verdict serialized_size() {
  Verdict v;
  Scenario sc = testing::shipped_scenario("appendix_3_1");
  const std::size_t scripted = sc.turns.size();
  for (int i = 0; i < 50; ++i) sc.turns.push_back(ScenarioTurn{"Thanks!"});
  const auto run = run_scenario(sc, testing::bench_context());
  const auto size_after = [&](std::size_t noops) {
    return serialize_concept(run.records[scripted + noops - 1].concept_after).size();
  };
  const auto five = size_after(5);
  const auto fifty = size_after(50);
  const double drift = std::fabs(static_cast<double>(fifty) - static_cast<double>(five)) / static_cast<double>(five);
  v.require(drift <= 0.01, fmt::format("{} bytes after 5, {} after 50", five, fifty));
  if (v.ok) v.detail = fmt::format("{} bytes after 5 no-op turns, {} after 50", five, fifty);
  return v;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"reference table arithmetic replay", 1.0, table1_replay},
      {"structural efficiency on the 10-turn synthetic scenario", 5.0, structural_efficiency},
      {"50-turn synthetic scenario: bound, ratio, no replay", 10.0, fifty_turns},
      {"worked multi-turn examples end to end", 0.0, worked_examples},
      {"operator library shape and requirements", 0.0, operator_library},
      {"store oracle suite", 0.0, store_oracle},
      {"determinism of records and reports", 0.0, determinism},
      {"serialized size stable under no-op turns", 0.0, serialized_size},
  };
  int failures = 0;
  int n = 0;
  for (const auto& c : criteria) {
    ++n;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v.ok = false;
      v.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (v.ok && c.limit_s > 0 && secs >= c.limit_s) {
      v.ok = false;
      v.detail = fmt::format("took {:.2f}s, limit {:.0f}s", secs, c.limit_s);
    }
    failures += !v.ok;
    std::printf("%s [%d] %s (%.3fs): %s\n", v.ok ? "PASS" : "FAIL", n, c.name.c_str(), secs, v.detail.c_str());
  }
  std::printf("%d/%zu criteria passed\n", n - failures, criteria.size());
  return failures;
}
