#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "pixplore/agent.hpp"
#include "pixplore/image.hpp"
#include "pixplore/vision.hpp"
#include "pixplore/widget_types.hpp"
#include "pixplore/layout_encoder.hpp"
#include "pixplore/simenv.hpp"
#include "pixplore/stats.hpp"

namespace pixplore {

enum class PolicyKind { kDqn, kRandom, kMonkey };
std::string_view policy_name(PolicyKind p);
std::optional<PolicyKind> policy_from_name(std::string_view name);

struct RunConfig {
  std::uint64_t app_seed = 1;
  std::uint64_t agent_seed = 1;
  std::uint64_t encoder_seed = 7;
  std::string encoder = "lstm";  // or "structural"
  int encoder_corpus = 100;
  int encoder_epochs = 150;
  int d_layout = 32;
  ExploreConfig agent;  // embedding dims and thresholds live in agent.embedding
  int budget_steps = 300;
  PolicyKind policy = PolicyKind::kDqn;
  GenerationParams generation;
};

// Parses and validates; every problem is reported as "field.path: reason" in
// one kConfig error. Missing fields keep their defaults.
RunConfig parse_run_config(const std::string& json_text);
std::vector<std::string> validate(const RunConfig& cfg);
std::string run_config_to_json(const RunConfig& cfg);

LayoutEncoder make_encoder(const RunConfig& cfg);

// Uniform over the applicable actions.
Action random_policy(const std::vector<Action>& actions, Rng& rng);
// Random kind at a random screen coordinate; may hit nothing.
Action monkey_policy(int width, int height, Platform platform, Rng& rng);

struct Coverage {
  std::set<int> screens;
  std::set<int> transitions;  // indices into the app's ordered transition map
  std::set<int> crashes;
  std::vector<int> screen_curve;  // cumulative counts after each step
  std::vector<int> transition_curve;
  std::vector<int> crash_curve;
  double screen_coverage = 0.0;
  double transition_coverage = 0.0;
};

// Throws kUniverseMismatch when the log references screens, transitions or
// crashes the app does not define.
Coverage coverage(const SimApp& app, const EpisodeLog& log);

// Percentage per action kind name, in taxonomy order. Throws kEmptyLog.
std::vector<std::pair<std::string, double>> action_distribution(const EpisodeLog& log);

struct CoverageSet {
  std::string universe;  // e.g. "app:3/screens:30"
  std::set<int> items;
};

// |a \ b| / |a|, zero for empty a.
double cross_coverage(const CoverageSet& a, const CoverageSet& b);
std::size_t intersection_coverage(const CoverageSet& a, const CoverageSet& b);

// Report JSON, a pure function of (app, log).
std::string report_json(const SimApp& app, const EpisodeLog& log);
CoverageSet report_screens(const std::string& report_json_text);
CoverageSet report_transitions(const std::string& report_json_text);

struct RunResult {
  EpisodeLog log;
  Coverage coverage;
  QNetwork network;
  int registry_entries = 0;
};

RunResult run(const SimApp& app, const RunConfig& cfg, const LayoutEncoder& encoder);

struct BenchSuite {
  std::vector<std::uint64_t> apps;
  int repetitions = 5;
  std::vector<PolicyKind> policies{PolicyKind::kDqn, PolicyKind::kRandom};
  RunConfig base;
};
BenchSuite parse_bench_suite(const std::string& json_text);

struct BenchRow {
  std::uint64_t app_seed = 0;
  int repetition = 0;
  PolicyKind policy = PolicyKind::kDqn;
  double screen_coverage = 0.0;
  double transition_coverage = 0.0;
  std::set<int> crashes;
};

struct PolicySummary {
  PolicyKind policy = PolicyKind::kDqn;
  std::vector<double> per_app_median;  // screen coverage, suite app order
  double median = 0.0;                 // median of per-app medians
  long crashes = 0;                    // distinct crashes per app, summed
};

struct BenchSummary {
  std::vector<BenchRow> rows;
  std::vector<PolicySummary> policies;
  // First policy against the second when both exist.
  double relative_gain = 0.0;
  WilcoxonResult wilcoxon;
};

using BenchProgress = std::function<void(const BenchRow&)>;
BenchSummary run_bench(const BenchSuite& suite, const LayoutEncoder& encoder, const BenchProgress& progress = {});
std::string bench_csv(const BenchSummary& summary);
std::string bench_summary_json(const BenchSummary& summary);

// Whole-file helpers; both throw kIo.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& text);

// Labelled screenshots for detector evaluation.
struct VisionSample {
  Image image;
  std::vector<WidgetBox> boxes;
  std::vector<WidgetType> types;
};

// One screen per seed in [first_seed, first_seed + n), rendered from a
// generated app.
std::vector<VisionSample> simulated_vision_corpus(std::uint64_t first_seed, int n);

// Directory layout: NNNN.pgm next to NNNN.json ({"widgets": [{"x", "y", "w", "h", "type"}]}).
void write_vision_corpus(const std::filesystem::path& dir, const std::vector<VisionSample>& samples);
std::vector<VisionSample> read_vision_corpus(const std::filesystem::path& dir);

struct VisionScore {
  long true_pos = 0;
  long false_pos = 0;
  long false_neg = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long typed = 0;  // ground-truth widgets whose classified type matches
  long widgets = 0;
  double type_accuracy = 0.0;
};

// Detection matched at `iou_threshold`; type accuracy classifies the
// ground-truth boxes.
VisionScore evaluate_vision(const std::vector<VisionSample>& samples, const VisionConfig& cfg = {},
                            double iou_threshold = 0.8);
std::string vision_score_json(const VisionScore& score);

// Agent seed used for (app, repetition) so every policy sees the same stream.
std::uint64_t bench_agent_seed(std::uint64_t app_seed, int repetition);

}  // namespace pixplore
