// concore: command-line front end (validate-operators, bench, serve, repl).
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <httplib.h>

#include "concore/bench.hpp"
#include "concore/data.hpp"
#include "concore/error.hpp"
#include "concore/service.hpp"

namespace {

using namespace concore;

struct Options {
  std::string data_dir;
  std::string operators, rules, lexicon, templates;
  double theta = 0.3;
  std::string similarity = "coverage";
  std::size_t packet_budget = 256;
  std::size_t summary_budget = 160;
  bool shadow_baseline = false;
  std::string backend = "mock";
  std::optional<std::uint64_t> seed;
  std::size_t capacity = 32;
  long ttl_days = 30;
  std::string store_path;

  DataPaths paths() const {
    DataPaths p = DataPaths::in(data_dir.empty() ? default_data_dir() : std::filesystem::path(data_dir));
    if (!operators.empty()) p.operators = operators;
    if (!rules.empty()) p.rules = rules;
    if (!lexicon.empty()) p.lexicon = lexicon;
    if (!templates.empty()) p.templates = templates;
    return p;
  }

  EngineConfig engine_config() const {
    EngineConfig c;
    c.theta = theta;
    c.similarity = text::similarity_from_string(similarity);
    c.budget = {packet_budget, summary_budget};
    c.shadow_baseline = shadow_baseline;
    c.validate();
    return c;
  }

  StoreConfig store_config() const {
    StoreConfig s;
    s.capacity_per_user = capacity;
    s.ttl = std::chrono::days{ttl_days};
    if (!store_path.empty()) s.persistence_path = store_path;
    s.validate();
    return s;
  }

  std::shared_ptr<ModelBackend> make_backend() const {
    if (backend == "remote") return std::make_shared<RemoteBackend>(RemoteConfig::from_env());
    return std::make_shared<MockBackend>(MockTemplates::load_file(paths().templates));
  }
};

void write_out(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw PersistenceError(fmt::format("cannot write {}", path));
}

int cmd_validate(const std::string& path, bool canonical) {
  try {
    const auto lib = OperatorLibrary::load_file(path);
    std::size_t families = 0;
    for (auto f : kAllFamilies) families += lib.members(f).empty() ? 0 : 1;
    if (canonical) {
      const auto report = check_canonical_shape(lib);
      if (!report.ok()) {
        for (const auto& v : report.violations) fmt::print("violation: {} {}: {}\n", v.operator_id, v.field, v.reason);
        return 1;
      }
    }
    fmt::print("ok: {} operators in {} families (version {})\n", lib.size(), families,
               lib.version().empty() ? "-" : lib.version());
    return 0;
  } catch (const ValidationError& e) {
    fmt::print("{}\n", e.what());
    return 1;
  } catch (const Error& e) {
    fmt::print("error: {}\n", e.what());
    return 1;
  }
}

int cmd_bench(const Options& opt, const std::string& scenario_path, const std::string& format, const std::string& out,
              const std::string& records_out) {
  const Scenario scenario = load_scenario(scenario_path);
  const auto fmt_kind = report_format_from_string(format);
  ScenarioRun run;
  if (scenario.is_replay()) {
    run = run_scenario(scenario, BenchContext{});
  } else {
    const auto paths = opt.paths();
    BenchContext ctx{load_interpreter(paths), MockTemplates::load_file(paths.templates), opt.engine_config(),
                     opt.seed.value_or(42)};
    run = run_scenario(scenario, ctx);
  }
  write_out(out, write_report(run.stats, fmt_kind));
  if (!records_out.empty()) write_out(records_out, records_to_jsonl(run.records));
  std::cerr << kReportNote << "\n";
  return 0;
}

struct Runtime {
  std::shared_ptr<Engine> engine;
  std::shared_ptr<Clock> clock;
};

Runtime make_runtime(const Options& opt) {
  auto interpreter = load_interpreter(opt.paths());
  auto store = std::make_shared<ConceptStore>(opt.store_config());
  auto ids = std::make_shared<IdSource>(opt.seed);
  std::shared_ptr<Clock> clock;
  if (opt.seed) {
    clock = std::make_shared<LogicalClock>(default_epoch());
  } else {
    clock = std::make_shared<SystemClock>();
  }
  return {std::make_shared<Engine>(interpreter, opt.make_backend(), store, ids), clock};
}

int cmd_serve(const Options& opt, const std::string& host, int port, const std::string& static_dir) {
  auto rt = make_runtime(opt);
  Service service(rt.engine, rt.clock, opt.engine_config());
  const auto replay = scenario_path("table1_replay");
  if (std::filesystem::exists(replay)) service.set_reference_replay(load_scenario(replay).per_turn);

  httplib::Server server;
  if (!static_dir.empty() && !server.set_mount_point("/", static_dir)) {
    throw ConfigError(fmt::format("static dir {} not found", static_dir));
  }
  bind_routes(server, service);
  fmt::print("listening on http://{}:{}\n", host, port);
  std::fflush(stdout);
  if (!server.listen(host, port)) throw ConfigError(fmt::format("cannot listen on {}:{}", host, port));
  return 0;
}

int cmd_repl(const Options& opt, const std::string& user) {
  auto rt = make_runtime(opt);
  Session session = rt.engine->open_session(user, opt.engine_config());
  std::string line;
  fmt::print("session {} (:state, :quit)\n> ", session.session_id);
  std::fflush(stdout);
  while (std::getline(std::cin, line)) {
    const std::string cmd = text::trim(line);
    if (cmd == ":quit" || cmd == ":q") break;
    if (cmd == ":state") {
      if (session.active_concept) fmt::print("{}\n", concept_to_json(*session.active_concept).dump(2));
      for (const auto& d : rt.engine->dormant_concepts(session)) {
        fmt::print("dormant {}: {}\n", d.concept_id, d.task_summary);
      }
    } else if (!cmd.empty()) {
      const TurnRecord rec = rt.engine->process_turn(session, cmd, rt.clock->now());
      fmt::print("[{} via {}] topic={} tokens={}\n", rec.operator_id.str(), rec.rule_id,
                 to_string(rec.topic_decision.kind), rec.core_prompt_tokens);
      if (rec.failed) {
        fmt::print("backend error: {}\n", rec.error);
      } else {
        fmt::print("{}\n", rec.response);
      }
      fmt::print("{}", render_concept_summary(rec.concept_after, opt.summary_budget).text);
    }
    fmt::print("> ");
    std::fflush(stdout);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CORE middleware: operator library, concept state, packets, bench and service"};
  app.set_config("--config", "", "TOML/INI config file with any of the options below");
  app.require_subcommand(1);

  Options opt;
  std::uint64_t seed = 0;
  app.add_option("--data-dir", opt.data_dir, "Directory with the shipped data files");
  app.add_option("--operators", opt.operators, "Operator library file");
  app.add_option("--rules", opt.rules, "Selection ruleset file");
  app.add_option("--lexicon", opt.lexicon, "Extraction lexicon file");
  app.add_option("--templates", opt.templates, "Mock response templates file");
  app.add_option("--theta", opt.theta, "Reactivation threshold in (0, 1]")->capture_default_str();
  app.add_option("--similarity", opt.similarity, "Topic similarity: coverage | jaccard")->capture_default_str();
  app.add_option("--packet-budget", opt.packet_budget, "Packet token budget")->capture_default_str();
  app.add_option("--summary-budget", opt.summary_budget, "Concept summary token budget")->capture_default_str();
  app.add_flag("--shadow-baseline", opt.shadow_baseline, "Also count the transcript-replay prompt");
  app.add_option("--backend", opt.backend, "mock | remote")->check(CLI::IsMember({"mock", "remote"}))->capture_default_str();
  auto* seed_opt = app.add_option("--seed", seed, "Seed ids and use a logical clock");
  app.add_option("--capacity", opt.capacity, "Warm store capacity per user")->capture_default_str();
  app.add_option("--ttl-days", opt.ttl_days, "Warm store TTL in days")->capture_default_str();
  app.add_option("--store-path", opt.store_path, "Persist the warm store under this directory");

  auto* validate = app.add_subcommand("validate-operators", "Validate an operator library file");
  std::string lib_path;
  bool canonical = false;
  validate->add_option("path", lib_path, "Library file")->required();
  validate->add_flag("--canonical", canonical, "Also require 40 operators, 8 per family");

  auto* bench = app.add_subcommand("bench", "Run a scenario and write token statistics");
  std::string scenario, format = "csv", out = "-", records;
  bench->add_option("--scenario", scenario, "Scenario file")->required();
  bench->add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  bench->add_option("--out", out, "Output path ('-' for stdout)")->capture_default_str();
  bench->add_option("--records", records, "Also write TurnRecords as JSON lines");

  auto* serve = app.add_subcommand("serve", "Run the HTTP JSON API");
  int port = 8080;
  std::string host = "127.0.0.1", static_dir;
  serve->add_option("--port", port, "Port")->capture_default_str();
  serve->add_option("--host", host, "Bind address")->capture_default_str();
  serve->add_option("--static-dir", static_dir, "Serve files from this directory at /");

  auto* repl = app.add_subcommand("repl", "Interactive session on stdin");
  std::string user = "local";
  repl->add_option("--user", user, "User id")->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  if (seed_opt->count() > 0) opt.seed = seed;

  try {
    if (*validate) return cmd_validate(lib_path, canonical);
    if (*bench) return cmd_bench(opt, scenario, format, out, records);
    if (*serve) return cmd_serve(opt, host, port, static_dir);
    if (*repl) return cmd_repl(opt, user);
  } catch (const ExpectationMismatch& e) {
    fmt::print(stderr, "expectation failed: {}\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
  return 0;
}
