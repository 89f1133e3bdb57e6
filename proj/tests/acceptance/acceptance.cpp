// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit when any
// criterion fails. Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gradcheck.hpp"
#include "pixplore/agent.hpp"
#include "pixplore/embedding.hpp"
#include "pixplore/error.hpp"
#include "pixplore/harness.hpp"
#include "pixplore/layout.hpp"
#include "pixplore/layout_encoder.hpp"
#include "pixplore/qnetwork.hpp"
#include "pixplore/stats.hpp"
#include "pixplore/weights_io.hpp"
#include "ted_oracle.hpp"

using namespace pixplore;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double limit_seconds;
  std::function<Outcome()> check;
};

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

// Shared by several criteria; trained on first use.
double fit_seconds = 0.0;

const EncoderFit& default_fit() {
  static const EncoderFit fit = [] {
    const auto start = std::chrono::steady_clock::now();
    EncoderFit f = fit_default_encoder(100, EncoderTrainConfig{});
    fit_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return f;
  }();
  return fit;
}

Outcome reward_table() {
  struct Case {
    int m, n, visits;
    double expected;
  };
  const std::vector<Case> hand{{10, 0, 1, 1.0}, {8, 3, 4, 0.3125}, {5, 5, 1, 0.0}};
  double worst = 0.0;
  int checked = 0;
  for (const auto& c : hand) {
    worst = std::max(worst, std::fabs(reward(c.m, c.n, c.visits) - c.expected));
    ++checked;
  }
  // (m - n) / (m sqrt(N)) evaluated in extended precision
  Rng rng(2024);
  for (int i = 0; i < 20; ++i) {
    const int m = rng.range(1, 60);
    const int n = rng.range(0, m);
    const int visits = rng.range(1, 500);
    const long double expected =
        static_cast<long double>(m - n) / (static_cast<long double>(m) * std::sqrt(static_cast<long double>(visits)));
    worst = std::max(worst, static_cast<double>(std::fabs(reward(m, n, visits) - expected)));
    ++checked;
  }
  return {worst <= 1e-9, format("%d cases, max error %.2e", checked, worst)};
}

Outcome ted_oracle() {
  long pairs = 0, mismatches = 0;
  // every ordered pair of forests up to 4 nodes
  std::vector<std::string> small;
  for (std::size_t n = 0; n <= 4; ++n) {
    for (auto& s : oracle::forests_of_size(n)) small.push_back(s);
  }
  for (const auto& a : small) {
    const auto dist = oracle::distances_from(a, 4);
    const LayoutString la{a};
    for (const auto& b : small) {
      ++pairs;
      if (tree_edit_distance(la, LayoutString{b}) != dist.at(b)) ++mismatches;
    }
  }
  // every forest up to 6 nodes against fixed sources
  Rng rng(6);
  std::vector<std::string> sources{""};
  const auto six = oracle::forests_of_size(6);
  const auto five = oracle::forests_of_size(5);
  while (sources.size() < 60) {
    const auto& pool = sources.size() % 3 == 0 ? five : six;
    sources.push_back(pool[rng.index(pool.size())]);
  }
  std::size_t space = 0;
  for (const auto& src : sources) {
    const auto dist = oracle::distances_from(src, 6);
    space = dist.size();
    const LayoutString ls{src};
    for (const auto& [target, d] : dist) {
      ++pairs;
      if (tree_edit_distance(ls, LayoutString{target}) != d) ++mismatches;
    }
  }
  // metric properties on random pairs of layout-sized trees
  std::vector<std::string> pool;
  for (std::size_t n = 1; n <= 8; ++n) {
    auto f = oracle::forests_of_size(std::min<std::size_t>(n, 6));
    for (int k = 0; k < 40; ++k) pool.push_back(f[rng.index(f.size())]);
  }
  long metric_failures = 0;
  for (int i = 0; i < 1000; ++i) {
    const LayoutString a{pool[rng.index(pool.size())]}, b{pool[rng.index(pool.size())]},
        c{pool[rng.index(pool.size())]};
    const int ab = tree_edit_distance(a, b);
    if (ab != tree_edit_distance(b, a)) ++metric_failures;
    if (ab > tree_edit_distance(a, c) + tree_edit_distance(c, b)) ++metric_failures;
    if ((ab == 0) != (a.text == b.text)) ++metric_failures;
  }
  return {mismatches == 0 && metric_failures == 0 && space == 107725,
          format("%ld oracle pairs (all <=4-node pairs; %zu sources x %zu forests <=6 nodes), %ld mismatches, "
                 "%ld metric failures",
                 pairs, sources.size(), space, mismatches, metric_failures)};
}

Outcome vision_f1() {
  const VisionScore s = evaluate_vision(simulated_vision_corpus(1, 100));
  return {s.f1 >= 0.90, format("F1 %.4f (P %.4f, R %.4f, %ld widgets)", s.f1, s.precision, s.recall, s.widgets)};
}

Outcome gradient_check() {
  double worst = 0.0;
  for (int net_i = 0; net_i < 10; ++net_i) {
    const int input_dim = 6 + net_i;
    const QNetwork net = gradcheck::random_net(input_dim, 16, 4, 100 + static_cast<std::uint64_t>(net_i));
    Rng rng(500 + static_cast<std::uint64_t>(net_i));
    for (int b = 0; b < 10; ++b) {
      const auto batch = gradcheck::random_batch(input_dim, 8, rng);
      worst = std::max(worst, gradcheck::max_relative_error(net, batch));
    }
  }
  return {worst < 1e-4, format("100 net/batch pairs, max relative error %.2e", worst)};
}

WidgetDescriptor hand_widget(WidgetBox box, double image, WidgetType t) {
  WidgetDescriptor d;
  d.box = box;
  d.image_vec = {image};
  d.loc_vec = {0.0};
  d.type = t;
  d.type_onehot = one_hot(t);
  return d;
}

Outcome similarity_contracts() {
  const EmbeddingConfig cfg;
  const LayoutEncoder& enc = default_fit().encoder;
  std::vector<PageState> pages;
  Rng rng(55);
  for (std::uint64_t seed = 1; pages.size() < 120; ++seed) {
    const SimApp app = generate_app(seed, GenerationParams{});
    for (int k = 0; k < 3; ++k) {
      const int screen = static_cast<int>(rng.index(app.screens.size()));
      pages.push_back(page_state(render(app, screen, app.width, app.height), cfg, enc));
    }
  }
  int failures = 0, same = 0;
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 200; ++i) {
    const auto& a = pages[rng.index(pages.size())];
    const auto& b = pages[rng.index(pages.size())];
    const double ab = page_similarity(a, b, cfg);
    lo = std::min(lo, ab);
    hi = std::max(hi, ab);
    if (ab != page_similarity(b, a, cfg)) ++failures;
    if (ab < 0.0 || ab > 1.0) ++failures;
    if (page_similarity(a, a, cfg) != 1.0) ++failures;
    if (same_page(a, b, cfg) != (ab >= 0.75)) ++failures;
    same += same_page(a, b, cfg) ? 1 : 0;
  }
  // weighted-sum hand cases with one-dimensional image and location vectors
  EmbeddingConfig tiny;
  tiny.d_img = 1;
  tiny.d_loc = 1;
  const LayoutEncoder flat = LayoutEncoder::structural(8);
  const WidgetBox box{10, 10, 30, 20};
  const PageState x = assemble_page(100, 100, {hand_widget(box, 0.0, WidgetType::kButton)}, tiny, flat);
  const PageState y = assemble_page(100, 100, {hand_widget(box, 1.6, WidgetType::kButton)}, tiny, flat);
  const PageState z = assemble_page(100, 100, {hand_widget({60, 60, 30, 20}, 0.0, WidgetType::kButton)}, tiny, flat);
  const double xy = page_similarity(x, y, tiny), xz = page_similarity(x, z, tiny);
  const bool hand = std::fabs(xy - 0.8) < 1e-9 && same_page(x, y, tiny) && std::fabs(xz - 0.5) < 1e-9 &&
                    !same_page(x, z, tiny);
  return {failures == 0 && hand,
          format("200 pairs, %d violations, similarity range [%.3f, %.3f], %d same-page; hand cases %.3f / %.3f",
                 failures, lo, hi, same, xy, xz)};
}

Outcome memory_sampling() {
  long violations = 0;
  Rng rng(64);
  const std::size_t n = 64;
  for (std::size_t size : {64, 100, 1000}) {
    ExplorationMemory mem(size);
    for (std::size_t i = 0; i < size; ++i) {
      Transition t;
      t.r = static_cast<double>(i);
      mem.push(std::move(t));
    }
    for (int trial = 0; trial < 1000; ++trial) {
      const auto batch = sample_batch(mem, n, rng);
      if (batch.size() != n) {
        ++violations;
        continue;
      }
      std::set<std::size_t> newest, rest;
      for (std::size_t i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(batch[i].r);
        (i < n / 2 ? newest : rest).insert(idx);
      }
      for (std::size_t k = size - n / 2; k < size; ++k) violations += newest.count(k) ? 0 : 1;
      if (rest.size() != n / 2) ++violations;
      for (std::size_t idx : rest) violations += idx < size - n / 2 ? 0 : 1;
    }
  }
  return {violations == 0, format("3 sizes x 1000 batches of 64, %ld violations", violations)};
}

Outcome boltzmann_weighting() {
  const auto p = boltzmann({1.0, 1.0}, {ActionKind::kClick, ActionKind::kReturn}, 1.0);
  const bool hand = std::fabs(p[0] - 0.6225) <= 1e-3 && std::fabs(p[1] - 0.3775) <= 1e-3;
  Rng rng(7);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> q;
    std::vector<ActionKind> kinds;
    const int n = rng.range(1, 40);
    for (int k = 0; k < n; ++k) {
      q.push_back(rng.uniform(-20, 20));
      kinds.push_back(static_cast<ActionKind>(rng.index(kActionKindCount)));
    }
    const auto probs = boltzmann(q, kinds, rng.uniform(0.05, 5.0));
    double sum = 0.0;
    for (double v : probs) sum += v;
    worst = std::max(worst, std::fabs(sum - 1.0));
  }
  return {hand && worst <= 1e-9, format("hand case (%.4f, %.4f), max |sum - 1| %.1e", p[0], p[1], worst)};
}

RunConfig bench_config() {
  RunConfig c;
  c.agent.hidden_width = 16;
  return c;
}

Outcome exploration_benefit() {
  BenchSuite suite;
  for (std::uint64_t s = 1; s <= 20; ++s) suite.apps.push_back(s);
  suite.repetitions = 5;
  suite.base = bench_config();
  const BenchSummary sum = run_bench(suite, default_fit().encoder);
  const auto& dqn = sum.policies[0];
  const auto& rnd = sum.policies[1];
  const bool pass = sum.relative_gain >= 0.15 && sum.wilcoxon.p_value < 0.05 && dqn.crashes >= rnd.crashes;
  return {pass, format("median coverage dqn %.3f vs random %.3f, gain %+.1f%%, Wilcoxon p %.3f, crashes %ld vs %ld",
                       dqn.median, rnd.median, 100.0 * sum.relative_gain, sum.wilcoxon.p_value, dqn.crashes,
                       rnd.crashes)};
}

Outcome encoder_fidelity() {
  const double rho = default_fit().test_spearman;
  return {rho >= 0.6 && fit_seconds < 300,
          format("held-out Spearman %.4f (d_layout 32, 100 strings, trained in %.1fs)", rho, fit_seconds)};
}

Outcome determinism() {
  RunConfig cfg = bench_config();
  const SimApp app = generate_app(cfg.app_seed, cfg.generation);
  int differing = 0;
  std::size_t steps = 0;
  for (PolicyKind p : {PolicyKind::kDqn, PolicyKind::kRandom, PolicyKind::kMonkey}) {
    cfg.policy = p;
    const RunResult a = run(app, cfg, default_fit().encoder);
    const RunResult b = run(app, cfg, default_fit().encoder);
    steps += a.log.records.size();
    if (a.log.to_ndjson() != b.log.to_ndjson()) ++differing;
    if (encode_weights(WeightsKind::kQNetwork, a.network.tensors()) !=
        encode_weights(WeightsKind::kQNetwork, b.network.tensors()))
      ++differing;
    if (report_json(app, a.log) != report_json(app, b.log)) ++differing;
  }
  return {differing == 0, format("3 policies x 2 runs (%zu steps), %d differing artifacts", steps, differing)};
}

Outcome cross_coverage_cases() {
  const CoverageSet a{"u", {1, 2, 3, 4}}, b{"u", {3, 4, 5}}, empty{"u", {}};
  const bool ok = cross_coverage(a, b) == 0.5 && std::fabs(cross_coverage(b, a) - 1.0 / 3.0) < 1e-12 &&
                  cross_coverage(a, a) == 0.0 && cross_coverage(b, b) == 0.0 && cross_coverage(empty, a) == 0.0 &&
                  cross_coverage(a, CoverageSet{"u", {9}}) == 1.0 && intersection_coverage(a, b) == 2;
  bool mismatch_rejected = false;
  try {
    cross_coverage(a, CoverageSet{"v", {1}});
  } catch (const Error& e) {
    mismatch_rejected = e.code() == ErrorCode::kUniverseMismatch;
  }
  return {ok && mismatch_rejected, format("cross({1,2,3,4},{3,4,5}) = %.2f, cross(a,a) = %.2f",
                                          cross_coverage(a, b), cross_coverage(a, a))};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "reward exactness", 1, reward_table},
      {2, "tree edit distance oracle", 120, ted_oracle},
      {3, "vision F1", 60, vision_f1},
      {4, "Q-network gradient check", 30, gradient_check},
      {5, "similarity contracts", 60, similarity_contracts},
      {6, "memory sampling", 10, memory_sampling},
      {7, "Boltzmann weighting", 1, boltzmann_weighting},
      {8, "exploration benefit", 1200, exploration_benefit},
      {9, "layout encoder fidelity", 300, encoder_fidelity},
      {10, "determinism", 1200, determinism},
      {11, "cross-coverage arithmetic", 1, cross_coverage_cases},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : criteria) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.limit_seconds;
    const bool pass = o.pass && in_time;
    failed += pass ? 0 : 1;
    std::printf("[%s] %2d. %s: %s; %.2fs (limit %.0fs)%s\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                o.detail.c_str(), secs, c.limit_seconds, in_time ? "" : " exceeded");
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
