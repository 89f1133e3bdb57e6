#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pixplore/actions.hpp"
#include "pixplore/embedding.hpp"
#include "pixplore/qnetwork.hpp"
#include "pixplore/rng.hpp"
#include "pixplore/simenv.hpp"

namespace pixplore {

// Curiosity reward (1 - n/m) / sqrt(N): n of m applicable actions already
// executed on the destination page, N visits of the source page.
double reward(int m_next, int n_next, int visits);

struct RegistryEntry {
  PageState page;  // representative: the first observation
  int visits = 1;
  std::set<ActionIdentity> applicable;
  std::set<ActionIdentity> executed;

  int m() const { return static_cast<int>(applicable.size()); }
  int n() const { return static_cast<int>(executed.size()); }
};

struct Registration {
  int id = 0;
  int visits = 1;
  bool is_new = true;
};

class PageRegistry {
 public:
  explicit PageRegistry(EmbeddingConfig cfg = {}) : cfg_(std::move(cfg)) {}

  // Joins the most similar entry at or above the threshold (lowest id on
  // ties) or appends a new one.
  Registration register_page(const PageState& page, const std::vector<Action>& actions);

  // Records an executed action; identities outside the entry's applicable
  // set are ignored so n <= m holds.
  void mark_executed(int id, const ActionIdentity& a);

  const RegistryEntry& entry(int id) const { return entries_.at(static_cast<std::size_t>(id)); }
  int size() const { return static_cast<int>(entries_.size()); }
  long total_visits() const;

 private:
  EmbeddingConfig cfg_;
  std::vector<RegistryEntry> entries_;
};

struct Transition {
  Vec s;
  Vec a;
  Vec s_next;
  double r = 0.0;
  std::shared_ptr<const std::vector<Vec>> next_actions;
};

class ExplorationMemory {
 public:
  explicit ExplorationMemory(std::size_t capacity = 10000);

  void push(Transition t);
  std::size_t size() const { return records_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& at(std::size_t i) const { return records_.at(i); }  // 0 = oldest

 private:
  std::size_t capacity_;
  std::deque<Transition> records_;
};

// Indices (0 = oldest) of the n/2 newest records followed by n/2 drawn
// without replacement from the rest. Throws kInsufficientMemory.
std::vector<std::size_t> sample_indices(std::size_t memory_size, std::size_t n, Rng& rng);
std::vector<Transition> sample_batch(const ExplorationMemory& mem, std::size_t n, Rng& rng);

double target_q(const Transition& t, const QNetwork& net, double gamma);

double category_weight(ActionKind k);

struct Selection {
  std::size_t index = 0;
  std::vector<double> probabilities;
  std::vector<double> q_values;
};

// SoftMax over weight(category) * Q / tau.
std::vector<double> boltzmann(const std::vector<double>& q, const std::vector<ActionKind>& kinds, double tau);
Selection select_action(const QNetwork& net, const Vec& state, const std::vector<Action>& candidates,
                        const std::vector<Vec>& embeddings, double tau, Rng& rng);

// A device or simulator the explorer drives through screenshots.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual Image screenshot() = 0;
  virtual StepOutcome execute(const Action& a) = 0;
  virtual void reset() = 0;

  // Ground truth for logging when the environment knows it.
  virtual std::optional<int> screen_id() const { return std::nullopt; }
  virtual std::optional<Trigger> fired_trigger() const { return std::nullopt; }
};

class SimEnvironment : public Environment {
 public:
  explicit SimEnvironment(const SimApp& app) : session_(app) {}
  Image screenshot() override { return session_.screenshot(); }
  StepOutcome execute(const Action& a) override { return session_.exec_step(a); }
  void reset() override { session_.reset(); }
  std::optional<int> screen_id() const override { return session_.current(); }
  std::optional<Trigger> fired_trigger() const override { return session_.last_trigger(); }

 private:
  SimSession session_;
};

struct ExploreConfig {
  EmbeddingConfig embedding;
  Platform platform = Platform::kMobile;
  double gamma = 0.9;
  double tau = 1.0;
  int hidden_width = 512;
  int hidden_layers = 4;
  int batch = 64;
  int epochs = 5;
  double learning_rate = 0.01;
  int minibatch = 32;
  int train_interval = 10;
  std::size_t memory_capacity = 10000;
  std::uint64_t seed = 1;
};

struct StepRecord {
  int step = 0;
  int page_entry_id = 0;
  bool is_new_page = false;
  ActionKind kind = ActionKind::kClick;
  std::optional<int> target;
  std::optional<double> parameter;
  std::optional<Point> point;
  double reward = 0.0;
  double q_chosen = 0.0;
  double q_max = 0.0;
  double q_mean = 0.0;
  int candidates = 0;
  std::optional<int> crash;
  std::string outcome;
  int next_entry_id = 0;
  bool next_is_new = false;
  std::optional<int> screen_from;
  std::optional<int> screen_to;
  std::optional<Trigger> trigger;
};

struct EpisodeLog {
  std::vector<StepRecord> records;
  bool aborted = false;
  std::string error;

  std::string to_ndjson() const;
  static EpisodeLog from_ndjson(const std::string& text);
};

// What a policy sees each step.
struct Observation {
  const Image& screenshot;
  const PageState& page;
  const std::vector<Action>& actions;
};

// Replaces DQN selection (used for the baseline policies). Returns the chosen
// action; `q_values` of the log stay zero.
using PolicyFn = std::function<Action(const Observation&, Rng&)>;

class Explorer {
 public:
  Explorer(ExploreConfig cfg, LayoutEncoder encoder);

  // Runs `budget` steps against `env` (which must be freshly reset).
  EpisodeLog explore(Environment& env, int budget, const PolicyFn& policy = {});

  const QNetwork& network() const { return net_; }
  const PageRegistry& registry() const { return registry_; }
  const ExplorationMemory& memory() const { return memory_; }
  int trainings() const { return trainings_; }

 private:
  void train_step();

  ExploreConfig cfg_;
  LayoutEncoder encoder_;
  QNetwork net_;
  PageRegistry registry_;
  ExplorationMemory memory_;
  Rng rng_;
  Rng train_rng_;
  int trainings_ = 0;
};

}  // namespace pixplore
