// Command-line front end: app generation, exploration runs, reports and the
// benchmark.  Exit codes: 0 success, 1 configuration error, 2 runtime failure.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pixplore/error.hpp"
#include "pixplore/harness.hpp"

namespace fs = std::filesystem;
using namespace pixplore;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

class Timer {
 public:
  explicit Timer(std::string label) : label_(std::move(label)), start_(std::chrono::steady_clock::now()) {}
  ~Timer() {
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    std::fprintf(stderr, "%s: %.2f s\n", label_.c_str(), s);
  }

 private:
  std::string label_;
  std::chrono::steady_clock::time_point start_;
};

struct GenappArgs {
  std::uint64_t seed = 1;
  int screens = 30;
  std::optional<double> edge_density;
  std::optional<double> crash_rate;
  std::string out;
};

struct ExploreArgs {
  std::string app;
  std::optional<std::string> policy;
  std::optional<int> budget;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> platform;
  std::string config;
  std::string out_dir = ".";
};

struct ReportArgs {
  std::string log;
  std::string app;
  std::string out;
};

struct CrosscovArgs {
  std::string a;
  std::string b;
};

struct BenchArgs {
  std::string suite;
  std::string out;
};

struct VisionArgs {
  std::string corpus;
  int generate = 0;
  std::uint64_t seed = 1;
};

void emit(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
  } else {
    write_file(out, text);
  }
}

int cmd_genapp(const GenappArgs& a) {
  GenerationParams p;
  p.n_screens = a.screens;
  if (a.edge_density) p.edge_density = *a.edge_density;
  if (a.crash_rate) p.crash_rate = *a.crash_rate;
  const SimApp app = generate_app(a.seed, p);
  emit(app_to_json(app), a.out);
  return 0;
}

int cmd_explore(const ExploreArgs& a) {
  RunConfig cfg = a.config.empty() ? RunConfig{} : parse_run_config(read_file(a.config));
  if (a.policy) {
    const auto p = policy_from_name(*a.policy);
    if (!p) throw Error(ErrorCode::kConfig, "policy: unknown policy '" + *a.policy + "'");
    cfg.policy = *p;
  }
  if (a.budget) cfg.budget_steps = *a.budget;
  if (a.seed) cfg.agent_seed = *a.seed;
  if (a.platform) {
    if (*a.platform == "mobile") {
      cfg.agent.platform = Platform::kMobile;
    } else if (*a.platform == "web") {
      cfg.agent.platform = Platform::kWeb;
    } else {
      throw Error(ErrorCode::kConfig, "platform: expected mobile or web");
    }
  }
  const SimApp app = app_from_json(read_file(a.app));

  LayoutEncoder encoder = [&] {
    Timer t("encoder");
    return make_encoder(cfg);
  }();
  RunResult res = [&] {
    Timer t("explore");
    return run(app, cfg, encoder);
  }();

  const fs::path dir(a.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
  write_file(dir / "config.json", run_config_to_json(cfg));
  write_file(dir / "run.ndjson", res.log.to_ndjson());
  write_file(dir / "report.json", report_json(app, res.log));
  if (cfg.policy == PolicyKind::kDqn) res.network.save(dir / "qnetwork.bin");
  std::printf("screens %zu/%zu  transitions %zu  crashes %zu\n", res.coverage.screens.size(), app.screens.size(),
              res.coverage.transitions.size(), res.coverage.crashes.size());
  return res.log.aborted ? kExitRuntime : 0;
}

int cmd_report(const ReportArgs& a) {
  const SimApp app = app_from_json(read_file(a.app));
  const EpisodeLog log = EpisodeLog::from_ndjson(read_file(a.log));
  emit(report_json(app, log), a.out);
  return 0;
}

int cmd_crosscov(const CrosscovArgs& a) {
  const std::string ra = read_file(a.a);
  const std::string rb = read_file(a.b);
  nlohmann::ordered_json j;
  const auto one = [&](const CoverageSet& x, const CoverageSet& y) {
    return nlohmann::ordered_json{{"a_over_b", cross_coverage(x, y)},
                                  {"b_over_a", cross_coverage(y, x)},
                                  {"intersection", intersection_coverage(x, y)},
                                  {"a_size", x.items.size()},
                                  {"b_size", y.items.size()}};
  };
  j["screens"] = one(report_screens(ra), report_screens(rb));
  j["transitions"] = one(report_transitions(ra), report_transitions(rb));
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_bench(const BenchArgs& a) {
  const BenchSuite suite = parse_bench_suite(read_file(a.suite));
  Timer total("bench");
  const LayoutEncoder encoder = make_encoder(suite.base);
  const BenchSummary summary = run_bench(suite, encoder, [](const BenchRow& r) {
    std::fprintf(stderr, "app %llu rep %d %s: screens %.3f\n", static_cast<unsigned long long>(r.app_seed),
                 r.repetition, std::string(policy_name(r.policy)).c_str(), r.screen_coverage);
  });
  emit(bench_csv(summary), a.out);
  std::cout << bench_summary_json(summary);
  return 0;
}

int cmd_eval_vision(const VisionArgs& a) {
  if (a.generate > 0) write_vision_corpus(a.corpus, simulated_vision_corpus(a.seed, a.generate));
  const auto samples = read_vision_corpus(a.corpus);
  if (samples.empty()) throw Error(ErrorCode::kConfig, "corpus " + a.corpus + " holds no labelled screenshots");
  Timer t("eval-vision");
  std::cout << vision_score_json(evaluate_vision(samples));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Widget-level GUI exploration with a deep Q-network on simulated apps"};
  cli.require_subcommand(1);

  GenappArgs genapp;
  auto* c_gen = cli.add_subcommand("genapp", "Generate a simulated app");
  c_gen->add_option("--seed", genapp.seed, "Generation seed");
  c_gen->add_option("--screens", genapp.screens, "Number of screens")->check(CLI::Range(2, 100000));
  c_gen->add_option("--edge-density", genapp.edge_density, "Extra edges per screen")->check(CLI::NonNegativeNumber);
  c_gen->add_option("--crash-rate", genapp.crash_rate, "Crash trigger probability")->check(CLI::Range(0.0, 1.0));
  c_gen->add_option("--out", genapp.out, "Output file (stdout when omitted)");

  ExploreArgs explore;
  auto* c_exp = cli.add_subcommand("explore", "Explore an app and write log, report and weights");
  c_exp->add_option("--app", explore.app, "App JSON")->required()->check(CLI::ExistingFile);
  c_exp->add_option("--policy", explore.policy, "dqn | random | monkey");
  c_exp->add_option("--budget", explore.budget, "Step budget");
  c_exp->add_option("--seed", explore.seed, "Agent seed");
  c_exp->add_option("--platform", explore.platform, "mobile | web");
  c_exp->add_option("--config", explore.config, "Run configuration JSON")->check(CLI::ExistingFile);
  c_exp->add_option("--out-dir", explore.out_dir, "Output directory");

  ReportArgs report;
  auto* c_rep = cli.add_subcommand("report", "Recompute a report from a log");
  c_rep->add_option("--log", report.log, "Episode log (NDJSON)")->required()->check(CLI::ExistingFile);
  c_rep->add_option("--app", report.app, "App JSON")->required()->check(CLI::ExistingFile);
  c_rep->add_option("--out", report.out, "Output file (stdout when omitted)");

  CrosscovArgs cross;
  auto* c_cross = cli.add_subcommand("crosscov", "Cross coverage between two reports");
  c_cross->add_option("--a", cross.a, "First report")->required()->check(CLI::ExistingFile);
  c_cross->add_option("--b", cross.b, "Second report")->required()->check(CLI::ExistingFile);

  BenchArgs bench;
  auto* c_bench = cli.add_subcommand("bench", "Run a benchmark suite");
  c_bench->add_option("--suite", bench.suite, "Suite JSON")->required()->check(CLI::ExistingFile);
  c_bench->add_option("--out", bench.out, "Per-run CSV (stdout when omitted)");

  VisionArgs vision;
  auto* c_vis = cli.add_subcommand("eval-vision", "Score widget detection on a labelled corpus");
  c_vis->add_option("--corpus", vision.corpus, "Corpus directory")->required();
  c_vis->add_option("--generate", vision.generate, "Write this many simulated screenshots first");
  c_vis->add_option("--seed", vision.seed, "First seed for --generate");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = cli.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*c_gen) return cmd_genapp(genapp);
    if (*c_exp) return cmd_explore(explore);
    if (*c_rep) return cmd_report(report);
    if (*c_cross) return cmd_crosscov(cross);
    if (*c_bench) return cmd_bench(bench);
    if (*c_vis) return cmd_eval_vision(vision);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.code() == ErrorCode::kConfig ? kExitConfig : kExitRuntime;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitRuntime;
}
