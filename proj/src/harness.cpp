#include "pixplore/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pixplore/error.hpp"

namespace pixplore {

namespace {

using ojson = nlohmann::ordered_json;

bool perfect_square(int d) {
  if (d <= 0) return false;
  const int s = static_cast<int>(std::lround(std::sqrt(static_cast<double>(d))));
  return s * s == d;
}

// Reads known keys of one JSON object, collecting type errors and unknown
// keys under their dotted path.
class FieldReader {
 public:
  FieldReader(const ojson& obj, std::string path, std::vector<std::string>& errors)
      : obj_(obj), path_(std::move(path)), errors_(errors) {
    if (!obj_.is_object()) {
      errors_.push_back(where("") + ": expected an object");
      return;
    }
  }

  ~FieldReader() {
    if (!obj_.is_object()) return;
    for (const auto& [key, value] : obj_.items()) {
      if (std::find(seen_.begin(), seen_.end(), key) == seen_.end()) errors_.push_back(where(key) + ": unknown field");
    }
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    seen_.push_back(key);
    if (!obj_.is_object() || !obj_.contains(key)) return;
    try {
      const auto& v = obj_.at(key);
      if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw std::runtime_error("expected a string");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw std::runtime_error("expected an integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0) {
            throw std::runtime_error("expected a non-negative integer");
          }
        }
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw std::runtime_error("expected a number");
      }
      out = v.get<T>();
    } catch (const std::exception& e) {
      errors_.push_back(where(key) + ": " + e.what());
    }
  }

  const ojson* child(const std::string& key) {
    seen_.push_back(key);
    if (!obj_.is_object() || !obj_.contains(key)) return nullptr;
    return &obj_.at(key);
  }

  std::string where(const std::string& key) const {
    if (key.empty()) return path_.empty() ? "<root>" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  const ojson& obj_;
  std::string path_;
  std::vector<std::string>& errors_;
  std::vector<std::string> seen_;
};

void read_config(const ojson& root, RunConfig& c, std::vector<std::string>& errors, const std::string& prefix) {
  auto sub = [&](const std::string& name) { return prefix.empty() ? name : prefix + "." + name; };
  FieldReader top(root, prefix, errors);
  if (const auto* j = top.child("seeds")) {
    FieldReader r(*j, sub("seeds"), errors);
    r.get("app", c.app_seed);
    r.get("agent", c.agent_seed);
    r.get("encoder", c.encoder_seed);
  }
  auto& e = c.agent.embedding;
  if (const auto* j = top.child("dims")) {
    FieldReader r(*j, sub("dims"), errors);
    r.get("d_img", e.d_img);
    r.get("d_loc", e.d_loc);
    r.get("d_layout", c.d_layout);
    r.get("hidden_width", c.agent.hidden_width);
    r.get("hidden_layers", c.agent.hidden_layers);
  }
  if (const auto* j = top.child("thresholds")) {
    FieldReader r(*j, sub("thresholds"), errors);
    r.get("match_iou", e.match_iou);
    r.get("same_page", e.same_page_threshold);
    r.get("widget_weight", e.widget_weight);
    r.get("layout_weight", e.layout_weight);
    r.get("canny_low", e.vision.canny_low);
    r.get("canny_high", e.vision.canny_high);
    r.get("gaussian_sigma", e.vision.gaussian_sigma);
    r.get("min_area_fraction", e.vision.min_area_fraction);
    r.get("min_side", e.vision.min_side);
    r.get("container_merge_iou", e.vision.container_merge_iou);
    r.get("gap_threshold", e.layout.gap_threshold);
    r.get("line_overlap", e.layout.line_overlap);
  }
  if (const auto* j = top.child("agent")) {
    FieldReader r(*j, sub("agent"), errors);
    r.get("gamma", c.agent.gamma);
    r.get("tau", c.agent.tau);
    r.get("learning_rate", c.agent.learning_rate);
    r.get("batch", c.agent.batch);
    r.get("epochs", c.agent.epochs);
    r.get("minibatch", c.agent.minibatch);
    r.get("train_interval", c.agent.train_interval);
    r.get("memory_capacity", c.agent.memory_capacity);
  }
  if (const auto* j = top.child("budget")) {
    FieldReader r(*j, sub("budget"), errors);
    r.get("steps", c.budget_steps);
  }
  std::string platform(platform_name(c.agent.platform));
  top.get("platform", platform);
  if (const auto p = platform_from_name(platform)) {
    c.agent.platform = *p;
  } else {
    errors.push_back(top.where("platform") + ": expected mobile or web");
  }
  std::string policy(policy_name(c.policy));
  top.get("policy", policy);
  if (const auto p = policy_from_name(policy)) {
    c.policy = *p;
  } else {
    errors.push_back(top.where("policy") + ": expected dqn, random or monkey");
  }
  if (const auto* j = top.child("encoder")) {
    FieldReader r(*j, sub("encoder"), errors);
    r.get("kind", c.encoder);
    r.get("corpus", c.encoder_corpus);
    r.get("epochs", c.encoder_epochs);
  }
  if (const auto* j = top.child("generation")) {
    FieldReader r(*j, sub("generation"), errors);
    r.get("screens", c.generation.n_screens);
    r.get("min_widgets", c.generation.min_widgets);
    r.get("max_widgets", c.generation.max_widgets);
    r.get("edge_density", c.generation.edge_density);
    r.get("crash_rate", c.generation.crash_rate);
    r.get("width", c.generation.width);
    r.get("height", c.generation.height);
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

ojson int_array(const std::set<int>& s) {
  ojson a = ojson::array();
  for (int v : s) a.push_back(v);
  return a;
}

ojson int_array(const std::vector<int>& s) {
  ojson a = ojson::array();
  for (int v : s) a.push_back(v);
  return a;
}

}  // namespace

std::string_view policy_name(PolicyKind p) {
  switch (p) {
    case PolicyKind::kDqn: return "dqn";
    case PolicyKind::kRandom: return "random";
    case PolicyKind::kMonkey: return "monkey";
  }
  return "dqn";
}

std::optional<PolicyKind> policy_from_name(std::string_view name) {
  if (name == "dqn") return PolicyKind::kDqn;
  if (name == "random") return PolicyKind::kRandom;
  if (name == "monkey") return PolicyKind::kMonkey;
  return std::nullopt;
}

std::vector<std::string> validate(const RunConfig& c) {
  std::vector<std::string> errs;
  auto need = [&](bool ok, const std::string& msg) {
    if (!ok) errs.push_back(msg);
  };
  const auto& e = c.agent.embedding;
  need(perfect_square(e.d_img), "dims.d_img: must be a positive perfect square");
  need(perfect_square(e.d_loc), "dims.d_loc: must be a positive perfect square");
  need(c.d_layout > 0, "dims.d_layout: must be positive");
  need(c.agent.hidden_width > 0, "dims.hidden_width: must be positive");
  need(c.agent.hidden_layers >= 1, "dims.hidden_layers: must be at least 1");
  need(e.match_iou > 0 && e.match_iou <= 1, "thresholds.match_iou: must be in (0, 1]");
  need(e.same_page_threshold >= 0 && e.same_page_threshold <= 1, "thresholds.same_page: must be in [0, 1]");
  need(e.widget_weight >= 0 && e.layout_weight >= 0 && std::fabs(e.widget_weight + e.layout_weight - 1.0) < 1e-9,
       "thresholds.widget_weight: weights must be non-negative and sum to 1 with layout_weight");
  need(e.vision.canny_low >= 0 && e.vision.canny_low <= e.vision.canny_high,
       "thresholds.canny_low: must satisfy 0 <= canny_low <= canny_high");
  need(e.vision.gaussian_sigma > 0, "thresholds.gaussian_sigma: must be positive");
  need(e.vision.min_area_fraction >= 0 && e.vision.min_area_fraction < 1,
       "thresholds.min_area_fraction: must be in [0, 1)");
  need(e.vision.min_side >= 1, "thresholds.min_side: must be at least 1");
  need(e.vision.container_merge_iou > 0 && e.vision.container_merge_iou <= 1,
       "thresholds.container_merge_iou: must be in (0, 1]");
  need(e.layout.gap_threshold >= 0 && e.layout.gap_threshold <= 1, "thresholds.gap_threshold: must be in [0, 1]");
  need(e.layout.line_overlap > 0 && e.layout.line_overlap <= 1, "thresholds.line_overlap: must be in (0, 1]");
  need(c.agent.gamma >= 0 && c.agent.gamma <= 1, "agent.gamma: must be in [0, 1]");
  need(c.agent.tau > 0, "agent.tau: must be positive");
  need(c.agent.learning_rate > 0, "agent.learning_rate: must be positive");
  need(c.agent.batch > 0 && c.agent.batch % 2 == 0, "agent.batch: must be a positive even number");
  need(c.agent.epochs >= 1, "agent.epochs: must be at least 1");
  need(c.agent.minibatch >= 1, "agent.minibatch: must be at least 1");
  need(c.agent.train_interval >= 1, "agent.train_interval: must be at least 1");
  need(c.agent.memory_capacity >= static_cast<std::size_t>(std::max(1, c.agent.batch)),
       "agent.memory_capacity: must hold at least one batch");
  need(c.budget_steps >= 0, "budget.steps: must be non-negative");
  need(c.encoder == "lstm" || c.encoder == "structural", "encoder.kind: expected lstm or structural");
  need(c.encoder_corpus >= 2, "encoder.corpus: must be at least 2");
  need(c.encoder_epochs >= 0, "encoder.epochs: must be non-negative");
  const auto& g = c.generation;
  need(g.n_screens >= 2, "generation.screens: must be at least 2");
  need(g.min_widgets >= 0 && g.min_widgets <= g.max_widgets, "generation.min_widgets: must be in [0, max_widgets]");
  need(g.edge_density >= 0, "generation.edge_density: must be non-negative");
  need(g.crash_rate >= 0 && g.crash_rate <= 1, "generation.crash_rate: must be in [0, 1]");
  need(g.width >= 32 && g.height >= 32, "generation.width: screen must be at least 32x32");
  return errs;
}

namespace {

void throw_if_invalid(std::vector<std::string> errors) {
  if (errors.empty()) return;
  std::string msg = "invalid configuration:";
  for (const auto& e : errors) msg += "\n  " + e;
  throw Error(ErrorCode::kConfig, msg);
}

// Range checks on fields that failed to parse would only repeat the
// default's verdict, so those are dropped.
void merge_validation(std::vector<std::string>& errors, std::vector<std::string> checks) {
  for (auto& check : checks) {
    const std::string field = check.substr(0, check.find(':'));
    const bool reported = std::any_of(errors.begin(), errors.end(),
                                      [&](const std::string& e) { return e.rfind(field + ":", 0) == 0; });
    if (!reported) errors.push_back(std::move(check));
  }
}

ojson parse_json(const std::string& text, const char* what) {
  try {
    return ojson::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string(what) + " is not valid JSON: " + e.what());
  }
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  RunConfig c;
  std::vector<std::string> errors;
  read_config(parse_json(json_text, "configuration"), c, errors, "");
  merge_validation(errors, validate(c));
  throw_if_invalid(std::move(errors));
  return c;
}

std::string run_config_to_json(const RunConfig& c) {
  const auto& e = c.agent.embedding;
  ojson j;
  j["seeds"] = ojson{{"app", c.app_seed}, {"agent", c.agent_seed}, {"encoder", c.encoder_seed}};
  j["dims"] = ojson{{"d_img", e.d_img},
                    {"d_loc", e.d_loc},
                    {"d_layout", c.d_layout},
                    {"hidden_width", c.agent.hidden_width},
                    {"hidden_layers", c.agent.hidden_layers}};
  j["thresholds"] = ojson{{"match_iou", e.match_iou},
                          {"same_page", e.same_page_threshold},
                          {"widget_weight", e.widget_weight},
                          {"layout_weight", e.layout_weight},
                          {"canny_low", e.vision.canny_low},
                          {"canny_high", e.vision.canny_high},
                          {"gaussian_sigma", e.vision.gaussian_sigma},
                          {"min_area_fraction", e.vision.min_area_fraction},
                          {"min_side", e.vision.min_side},
                          {"container_merge_iou", e.vision.container_merge_iou},
                          {"gap_threshold", e.layout.gap_threshold},
                          {"line_overlap", e.layout.line_overlap}};
  j["agent"] = ojson{{"gamma", c.agent.gamma},
                     {"tau", c.agent.tau},
                     {"learning_rate", c.agent.learning_rate},
                     {"batch", c.agent.batch},
                     {"epochs", c.agent.epochs},
                     {"minibatch", c.agent.minibatch},
                     {"train_interval", c.agent.train_interval},
                     {"memory_capacity", c.agent.memory_capacity}};
  j["budget"] = ojson{{"steps", c.budget_steps}};
  j["platform"] = std::string(platform_name(c.agent.platform));
  j["policy"] = std::string(policy_name(c.policy));
  j["encoder"] = ojson{{"kind", c.encoder}, {"corpus", c.encoder_corpus}, {"epochs", c.encoder_epochs}};
  j["generation"] = ojson{{"screens", c.generation.n_screens},
                          {"min_widgets", c.generation.min_widgets},
                          {"max_widgets", c.generation.max_widgets},
                          {"edge_density", c.generation.edge_density},
                          {"crash_rate", c.generation.crash_rate},
                          {"width", c.generation.width},
                          {"height", c.generation.height}};
  return j.dump(2) + "\n";
}

LayoutEncoder make_encoder(const RunConfig& cfg) {
  if (cfg.encoder == "structural") return LayoutEncoder::structural(cfg.d_layout);
  EncoderTrainConfig tc;
  tc.hidden = cfg.d_layout;
  tc.epochs = cfg.encoder_epochs;
  tc.seed = cfg.encoder_seed;
  return fit_default_encoder(static_cast<std::size_t>(cfg.encoder_corpus), tc).encoder;
}

Action random_policy(const std::vector<Action>& actions, Rng& rng) {
  if (actions.empty()) throw Error(ErrorCode::kInvalidArgument, "no applicable actions");
  return actions[rng.index(actions.size())];
}

Action monkey_policy(int width, int height, Platform platform, Rng& rng) {
  std::vector<ActionKind> kinds;
  for (const auto& info : action_taxonomy()) {
    if (available_on(info.kind, platform)) kinds.push_back(info.kind);
  }
  Action a;
  a.kind = kinds[rng.index(kinds.size())];
  switch (kind_info(a.kind).category) {
    case ActionCategory::kWidget:
      a.point = Point{rng.range(0, std::max(0, width - 1)), rng.range(0, std::max(0, height - 1))};
      if (a.kind == ActionKind::kInput) {
        a.payload = static_cast<int>(rng.index(kPayloadCount));
        a.parameter = static_cast<double>(a.payload) / (kPayloadCount - 1);
      }
      break;
    case ActionCategory::kPage:
      if (a.kind == ActionKind::kSwipe) a.parameter = rng.bernoulli(0.5) ? 1.0 : -1.0;
      if (a.kind == ActionKind::kOrientationSwitch) a.parameter = rng.bernoulli(0.5) ? 1.0 : 0.0;
      if (a.kind == ActionKind::kWindowSize) a.parameter = rng.bernoulli(0.5) ? 0.5 : 1.5;
      break;
    case ActionCategory::kSystem: break;
  }
  return a;
}

Coverage coverage(const SimApp& app, const EpisodeLog& log) {
  const int n_screens = static_cast<int>(app.screens.size());
  std::map<std::pair<int, Trigger>, int> index;
  for (const auto& [key, rule] : app.transitions) index.emplace(key, static_cast<int>(index.size()));
  std::set<int> crash_ids;
  for (const auto& [key, id] : app.crashes) crash_ids.insert(id);

  Coverage cov;
  auto check_screen = [&](const std::optional<int>& s, int step) {
    if (!s) throw Error(ErrorCode::kUniverseMismatch, "step " + std::to_string(step) + " has no ground-truth screen");
    if (*s < 0 || *s >= n_screens) {
      throw Error(ErrorCode::kUniverseMismatch, "step " + std::to_string(step) + " names screen " + std::to_string(*s) +
                                                    " but the app has " + std::to_string(n_screens));
    }
    return *s;
  };
  for (const auto& r : log.records) {
    cov.screens.insert(check_screen(r.screen_from, r.step));
    cov.screens.insert(check_screen(r.screen_to, r.step));
    if (r.crash) {
      if (crash_ids.count(*r.crash) == 0) {
        throw Error(ErrorCode::kUniverseMismatch, "crash id " + std::to_string(*r.crash) + " is not defined by the app");
      }
      cov.crashes.insert(*r.crash);
    } else if (r.trigger && r.outcome == "moved") {
      const auto it = index.find({*r.screen_from, *r.trigger});
      if (it == index.end()) {
        throw Error(ErrorCode::kUniverseMismatch, "step " + std::to_string(r.step) + " fired a transition the app lacks");
      }
      cov.transitions.insert(it->second);
    }
    cov.screen_curve.push_back(static_cast<int>(cov.screens.size()));
    cov.transition_curve.push_back(static_cast<int>(cov.transitions.size()));
    cov.crash_curve.push_back(static_cast<int>(cov.crashes.size()));
  }
  if (n_screens > 0) cov.screen_coverage = static_cast<double>(cov.screens.size()) / n_screens;
  if (!index.empty()) cov.transition_coverage = static_cast<double>(cov.transitions.size()) / index.size();
  return cov;
}

std::vector<std::pair<std::string, double>> action_distribution(const EpisodeLog& log) {
  if (log.records.empty()) throw Error(ErrorCode::kEmptyLog, "action distribution of an empty log");
  std::array<long, kActionKindCount> counts{};
  for (const auto& r : log.records) ++counts[static_cast<std::size_t>(r.kind)];
  std::vector<std::pair<std::string, double>> out;
  for (const auto& info : action_taxonomy()) {
    const long c = counts[static_cast<std::size_t>(info.kind)];
    if (c > 0) out.emplace_back(std::string(info.name), 100.0 * static_cast<double>(c) / log.records.size());
  }
  return out;
}

double cross_coverage(const CoverageSet& a, const CoverageSet& b) {
  if (a.universe != b.universe) {
    throw Error(ErrorCode::kUniverseMismatch, "coverage sets over '" + a.universe + "' and '" + b.universe + "'");
  }
  if (a.items.empty()) return 0.0;
  std::size_t only_a = 0;
  for (int x : a.items) only_a += b.items.count(x) == 0 ? 1 : 0;
  return static_cast<double>(only_a) / static_cast<double>(a.items.size());
}

std::size_t intersection_coverage(const CoverageSet& a, const CoverageSet& b) {
  if (a.universe != b.universe) {
    throw Error(ErrorCode::kUniverseMismatch, "coverage sets over '" + a.universe + "' and '" + b.universe + "'");
  }
  std::size_t both = 0;
  for (int x : a.items) both += b.items.count(x);
  return both;
}

std::string report_json(const SimApp& app, const EpisodeLog& log) {
  const Coverage cov = coverage(app, log);
  ojson j;
  j["universe"] = ojson{{"app_seed", app.seed},
                        {"screens", app.screens.size()},
                        {"transitions", app.transitions.size()},
                        {"crashes", app.crashes.size()}};
  j["steps"] = log.records.size();
  j["aborted"] = log.aborted;
  j["screen_coverage"] = cov.screen_coverage;
  j["transition_coverage"] = cov.transition_coverage;
  j["crashes_found"] = cov.crashes.size();
  j["screens_visited"] = int_array(cov.screens);
  j["transitions_covered"] = int_array(cov.transitions);
  j["crashes"] = int_array(cov.crashes);
  j["curves"] = ojson{{"screens", int_array(cov.screen_curve)},
                      {"transitions", int_array(cov.transition_curve)},
                      {"crashes", int_array(cov.crash_curve)}};
  ojson dist = ojson::object();
  if (!log.records.empty()) {
    for (const auto& [name, pct] : action_distribution(log)) dist[name] = pct;
  }
  j["action_distribution"] = dist;
  int entries = 0, new_pages = 0;
  double reward_sum = 0.0;
  for (const auto& r : log.records) {
    entries = std::max({entries, r.page_entry_id + 1, r.next_entry_id + 1});
    new_pages += r.next_is_new ? 1 : 0;
    reward_sum += r.reward;
  }
  j["registry"] = ojson{{"entries", entries},
                        {"observations", log.records.empty() ? 0 : log.records.size() + 1},
                        {"new_pages_after_start", new_pages}};
  j["mean_reward"] = log.records.empty() ? 0.0 : reward_sum / static_cast<double>(log.records.size());
  return j.dump(2) + "\n";
}

namespace {

CoverageSet report_set(const std::string& text, const char* items_key, const char* universe_key) {
  const ojson j = parse_json(text, "report");
  try {
    CoverageSet s;
    const auto& u = j.at("universe");
    s.universe = "app:" + std::to_string(u.at("app_seed").get<std::uint64_t>()) + "/" + universe_key + ":" +
                 std::to_string(u.at(universe_key).get<std::size_t>());
    for (const auto& v : j.at(items_key)) s.items.insert(v.get<int>());
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("malformed report: ") + e.what());
  }
}

}  // namespace

CoverageSet report_screens(const std::string& text) { return report_set(text, "screens_visited", "screens"); }
CoverageSet report_transitions(const std::string& text) {
  return report_set(text, "transitions_covered", "transitions");
}

RunResult run(const SimApp& app, const RunConfig& cfg, const LayoutEncoder& encoder) {
  throw_if_invalid(validate(cfg));
  ExploreConfig ec = cfg.agent;
  ec.seed = cfg.agent_seed;
  Explorer explorer(ec, encoder);
  SimEnvironment env(app);
  PolicyFn fn;
  if (cfg.policy == PolicyKind::kRandom) {
    fn = [](const Observation& o, Rng& rng) { return random_policy(o.actions, rng); };
  } else if (cfg.policy == PolicyKind::kMonkey) {
    const Platform platform = ec.platform;
    fn = [platform](const Observation& o, Rng& rng) {
      return monkey_policy(o.screenshot.width(), o.screenshot.height(), platform, rng);
    };
  }
  RunResult res;
  res.log = explorer.explore(env, cfg.budget_steps, fn);
  res.coverage = coverage(app, res.log);
  res.network = explorer.network();
  res.registry_entries = explorer.registry().size();
  return res;
}

BenchSuite parse_bench_suite(const std::string& json_text) {
  const ojson j = parse_json(json_text, "bench suite");
  BenchSuite s;
  std::vector<std::string> errors;
  {
    FieldReader r(j, "", errors);
    r.get("apps", s.apps);
    r.get("repetitions", s.repetitions);
    std::vector<std::string> names;
    r.get("policies", names);
    if (!names.empty()) s.policies.clear();
    for (const auto& n : names) {
      if (const auto p = policy_from_name(n)) {
        s.policies.push_back(*p);
      } else {
        errors.push_back("policies: unknown policy '" + n + "'");
      }
    }
    if (const auto* c = r.child("config")) read_config(*c, s.base, errors, "config");
  }
  if (s.apps.empty()) errors.push_back("apps: must list at least one app seed");
  if (s.repetitions < 1) errors.push_back("repetitions: must be at least 1");
  if (s.policies.empty()) errors.push_back("policies: must name at least one policy");
  std::vector<std::string> base_errors = validate(s.base);
  for (auto& e : base_errors) e = "config." + e;
  merge_validation(errors, std::move(base_errors));
  throw_if_invalid(std::move(errors));
  return s;
}

std::uint64_t bench_agent_seed(std::uint64_t app_seed, int repetition) {
  return Rng::splitmix(app_seed * 1000003ULL + static_cast<std::uint64_t>(repetition));
}

BenchSummary run_bench(const BenchSuite& suite, const LayoutEncoder& encoder, const BenchProgress& progress) {
  BenchSummary out;
  for (const auto app_seed : suite.apps) {
    const SimApp app = generate_app(app_seed, suite.base.generation);
    for (int rep = 0; rep < suite.repetitions; ++rep) {
      for (const auto policy : suite.policies) {
        RunConfig cfg = suite.base;
        cfg.app_seed = app_seed;
        cfg.agent_seed = bench_agent_seed(app_seed, rep);
        cfg.policy = policy;
        const RunResult res = run(app, cfg, encoder);
        if (res.log.aborted) throw Error(ErrorCode::kEnvironment, "bench run aborted: " + res.log.error);
        BenchRow row{app_seed, rep, policy, res.coverage.screen_coverage, res.coverage.transition_coverage,
                     res.coverage.crashes};
        if (progress) progress(row);
        out.rows.push_back(std::move(row));
      }
    }
  }
  for (const auto policy : suite.policies) {
    PolicySummary ps;
    ps.policy = policy;
    for (const auto app_seed : suite.apps) {
      std::vector<double> cov;
      std::set<int> crashes;
      for (const auto& r : out.rows) {
        if (r.app_seed == app_seed && r.policy == policy) {
          cov.push_back(r.screen_coverage);
          crashes.insert(r.crashes.begin(), r.crashes.end());
        }
      }
      ps.per_app_median.push_back(median(cov));
      ps.crashes += static_cast<long>(crashes.size());
    }
    ps.median = median(ps.per_app_median);
    out.policies.push_back(std::move(ps));
  }
  if (out.policies.size() >= 2) {
    const auto& a = out.policies[0];
    const auto& b = out.policies[1];
    out.relative_gain = b.median > 0 ? (a.median - b.median) / b.median : 0.0;
    out.wilcoxon = wilcoxon_signed_rank(a.per_app_median, b.per_app_median);
  }
  return out;
}

std::string bench_csv(const BenchSummary& s) {
  std::ostringstream os;
  os << "app_seed,repetition,policy,screen_coverage,transition_coverage,crashes\n";
  for (const auto& r : s.rows) {
    os << r.app_seed << ',' << r.repetition << ',' << policy_name(r.policy) << ',' << fmt(r.screen_coverage) << ','
       << fmt(r.transition_coverage) << ',' << r.crashes.size() << '\n';
  }
  return os.str();
}

std::string bench_summary_json(const BenchSummary& s) {
  ojson j;
  j["policies"] = ojson::array();
  for (const auto& p : s.policies) {
    ojson jp;
    jp["policy"] = std::string(policy_name(p.policy));
    jp["median_screen_coverage"] = p.median;
    jp["per_app_median"] = p.per_app_median;
    jp["distinct_crashes"] = p.crashes;
    j["policies"].push_back(jp);
  }
  if (s.policies.size() >= 2) {
    j["relative_gain"] = s.relative_gain;
    j["wilcoxon"] = ojson{{"statistic", s.wilcoxon.statistic},
                          {"p_value", s.wilcoxon.p_value},
                          {"n", s.wilcoxon.n},
                          {"exact", s.wilcoxon.exact}};
  }
  return j.dump(2) + "\n";
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

std::vector<VisionSample> simulated_vision_corpus(std::uint64_t first_seed, int n) {
  std::vector<VisionSample> out;
  GenerationParams p;
  p.n_screens = 2;
  for (int i = 0; i < n; ++i) {
    const std::uint64_t seed = first_seed + static_cast<std::uint64_t>(i);
    const SimApp app = generate_app(seed, p);
    const Screen& screen = app.screens[seed % 2];
    VisionSample s;
    s.image = render_screen(screen, Viewport{app.width, app.height});
    for (const auto& w : screen.widgets) {
      s.boxes.push_back(w.box);
      s.types.push_back(w.type);
    }
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

std::string corpus_stem(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04zu", i);
  return buf;
}

}  // namespace

void write_vision_corpus(const std::filesystem::path& dir, const std::vector<VisionSample>& samples) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    write_pgm(s.image, dir / (corpus_stem(i) + ".pgm"));
    ojson j;
    j["widgets"] = ojson::array();
    for (std::size_t k = 0; k < s.boxes.size(); ++k) {
      const auto& b = s.boxes[k];
      j["widgets"].push_back(
          ojson{{"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}, {"type", std::string(widget_type_name(s.types[k]))}});
    }
    write_file(dir / (corpus_stem(i) + ".json"), j.dump(2) + "\n");
  }
}

std::vector<VisionSample> read_vision_corpus(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error(ErrorCode::kIo, dir.string() + " is not a directory");
  std::vector<std::filesystem::path> labels;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.path().extension() == ".json") labels.push_back(e.path());
  }
  std::sort(labels.begin(), labels.end());
  std::vector<VisionSample> out;
  for (const auto& label : labels) {
    auto image_path = label;
    image_path.replace_extension(".pgm");
    VisionSample s;
    s.image = read_pgm(image_path);
    const ojson j = parse_json(read_file(label), label.string().c_str());
    try {
      for (const auto& w : j.at("widgets")) {
        const auto type = widget_type_from_name(w.at("type").get<std::string>());
        if (!type) throw Error(ErrorCode::kConfig, label.string() + ": unknown widget type");
        s.boxes.push_back(
            WidgetBox{w.at("x").get<int>(), w.at("y").get<int>(), w.at("w").get<int>(), w.at("h").get<int>()});
        s.types.push_back(*type);
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kConfig, label.string() + ": " + e.what());
    }
    out.push_back(std::move(s));
  }
  return out;
}

VisionScore evaluate_vision(const std::vector<VisionSample>& samples, const VisionConfig& cfg, double iou_threshold) {
  VisionScore v;
  for (const auto& s : samples) {
    const auto detected = detect_widgets(s.image, cfg);
    const long matched = static_cast<long>(match_widgets(detected, s.boxes, iou_threshold).size());
    v.true_pos += matched;
    v.false_pos += static_cast<long>(detected.size()) - matched;
    v.false_neg += static_cast<long>(s.boxes.size()) - matched;
    for (std::size_t k = 0; k < s.boxes.size(); ++k) {
      if (classify_widget_type(s.image, s.boxes[k]) == s.types[k]) ++v.typed;
      ++v.widgets;
    }
  }
  const auto ratio = [](long a, long b) { return b > 0 ? static_cast<double>(a) / static_cast<double>(b) : 0.0; };
  v.precision = ratio(v.true_pos, v.true_pos + v.false_pos);
  v.recall = ratio(v.true_pos, v.true_pos + v.false_neg);
  v.f1 = v.precision + v.recall > 0 ? 2 * v.precision * v.recall / (v.precision + v.recall) : 0.0;
  v.type_accuracy = ratio(v.typed, v.widgets);
  return v;
}

std::string vision_score_json(const VisionScore& v) {
  ojson j;
  j["true_positives"] = v.true_pos;
  j["false_positives"] = v.false_pos;
  j["false_negatives"] = v.false_neg;
  j["precision"] = v.precision;
  j["recall"] = v.recall;
  j["f1"] = v.f1;
  j["widgets"] = v.widgets;
  j["type_accuracy"] = v.type_accuracy;
  return j.dump(2) + "\n";
}

}  // namespace pixplore
