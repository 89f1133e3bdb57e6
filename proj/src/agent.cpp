#include "pixplore/agent.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "pixplore/error.hpp"

namespace pixplore {

double reward(int m_next, int n_next, int visits) {
  if (m_next < 1) throw Error(ErrorCode::kInvalidArgument, "reward needs at least one applicable action");
  if (n_next < 0 || n_next > m_next) throw Error(ErrorCode::kInvalidArgument, "executed count must lie in [0, m]");
  if (visits < 1) throw Error(ErrorCode::kInvalidArgument, "visit count must be positive");
  return (1.0 - static_cast<double>(n_next) / m_next) / std::sqrt(static_cast<double>(visits));
}

Registration PageRegistry::register_page(const PageState& page, const std::vector<Action>& actions) {
  int best = -1;
  double best_sim = -1.0;
  for (int i = 0; i < static_cast<int>(entries_.size()); ++i) {
    const double sim = page_similarity(entries_[i].page, page, cfg_);
    if (sim >= cfg_.same_page_threshold && sim > best_sim) {
      best = i;
      best_sim = sim;
    }
  }
  if (best >= 0) {
    auto& e = entries_[static_cast<std::size_t>(best)];
    ++e.visits;
    return Registration{best, e.visits, false};
  }
  RegistryEntry e;
  e.page = page;
  for (const auto& a : actions) e.applicable.insert(identity_of(a));
  entries_.push_back(std::move(e));
  return Registration{static_cast<int>(entries_.size()) - 1, 1, true};
}

void PageRegistry::mark_executed(int id, const ActionIdentity& a) {
  auto& e = entries_.at(static_cast<std::size_t>(id));
  if (e.applicable.count(a) > 0) e.executed.insert(a);
}

long PageRegistry::total_visits() const {
  long total = 0;
  for (const auto& e : entries_) total += e.visits;
  return total;
}

ExplorationMemory::ExplorationMemory(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw Error(ErrorCode::kInvalidArgument, "memory capacity must be positive");
}

void ExplorationMemory::push(Transition t) {
  if (records_.size() == capacity_) records_.pop_front();
  records_.push_back(std::move(t));
}

std::vector<std::size_t> sample_indices(std::size_t memory_size, std::size_t n, Rng& rng) {
  if (n == 0 || n % 2 != 0) throw Error(ErrorCode::kInvalidArgument, "batch size must be a positive even number");
  if (memory_size < n) {
    throw Error(ErrorCode::kInsufficientMemory,
                "memory holds " + std::to_string(memory_size) + " records, batch needs " + std::to_string(n));
  }
  const std::size_t half = n / 2;
  const std::size_t rest = memory_size - half;
  std::vector<std::size_t> out;
  out.reserve(n);
  for (std::size_t i = rest; i < memory_size; ++i) out.push_back(i);
  // Partial Fisher-Yates over the older records.
  std::vector<std::size_t> pool(rest);
  for (std::size_t i = 0; i < rest; ++i) pool[i] = i;
  for (std::size_t k = 0; k < half; ++k) {
    const std::size_t j = k + rng.index(rest - k);
    std::swap(pool[k], pool[j]);
    out.push_back(pool[k]);
  }
  return out;
}

std::vector<Transition> sample_batch(const ExplorationMemory& mem, std::size_t n, Rng& rng) {
  std::vector<Transition> out;
  for (std::size_t i : sample_indices(mem.size(), n, rng)) out.push_back(mem.at(i));
  return out;
}

double target_q(const Transition& t, const QNetwork& net, double gamma) {
  if (!t.next_actions || t.next_actions->empty()) {
    throw Error(ErrorCode::kInvalidArgument, "transition has no next actions");
  }
  if (gamma == 0.0) return t.r;
  double best = -INFINITY;
  for (const auto& a : *t.next_actions) best = std::max(best, net.forward(t.s_next, a));
  return t.r + gamma * best;
}

double category_weight(ActionKind k) { return kind_info(k).category == ActionCategory::kSystem ? 0.5 : 1.0; }

std::vector<double> boltzmann(const std::vector<double>& q, const std::vector<ActionKind>& kinds, double tau) {
  if (q.empty() || q.size() != kinds.size()) throw Error(ErrorCode::kInvalidArgument, "need one kind per Q-value");
  if (!(tau > 0.0)) throw Error(ErrorCode::kInvalidArgument, "temperature must be positive");
  std::vector<double> logits(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) logits[i] = category_weight(kinds[i]) * q[i] / tau;
  const double top = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (auto& l : logits) {
    l = std::exp(l - top);
    z += l;
  }
  for (auto& l : logits) l /= z;
  return logits;
}

Selection select_action(const QNetwork& net, const Vec& state, const std::vector<Action>& candidates,
                        const std::vector<Vec>& embeddings, double tau, Rng& rng) {
  if (candidates.empty() || candidates.size() != embeddings.size()) {
    throw Error(ErrorCode::kInvalidArgument, "need one embedding per candidate action");
  }
  Selection sel;
  std::vector<ActionKind> kinds;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    sel.q_values.push_back(net.forward(state, embeddings[i]));
    kinds.push_back(candidates[i].kind);
  }
  sel.probabilities = boltzmann(sel.q_values, kinds, tau);
  const double u = rng.uniform();
  double acc = 0.0;
  sel.index = candidates.size() - 1;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    acc += sel.probabilities[i];
    if (u < acc) {
      sel.index = i;
      break;
    }
  }
  return sel;
}

namespace {

using ojson = nlohmann::ordered_json;

template <typename T>
ojson opt(const std::optional<T>& v) {
  return v ? ojson(*v) : ojson(nullptr);
}

ojson trigger_json(const std::optional<Trigger>& t) {
  if (!t) return nullptr;
  return ojson{{"kind", std::string(kind_info(t->kind).name)}, {"slot", t->slot}, {"bucket", t->bucket}};
}

template <typename T>
std::optional<T> opt_get(const ojson& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

ActionKind kind_named(const std::string& name) {
  const auto k = action_kind_from_name(name);
  if (!k) throw Error(ErrorCode::kConfig, "unknown action kind '" + name + "' in log");
  return *k;
}

}  // namespace

std::string EpisodeLog::to_ndjson() const {
  std::ostringstream os;
  for (const auto& r : records) {
    ojson j;
    j["step"] = r.step;
    j["page_entry_id"] = r.page_entry_id;
    j["is_new_page"] = r.is_new_page;
    ojson a;
    a["kind"] = std::string(kind_info(r.kind).name);
    a["target"] = opt(r.target);
    a["parameter"] = opt(r.parameter);
    a["point"] = r.point ? ojson::array({r.point->x, r.point->y}) : ojson(nullptr);
    j["action"] = a;
    j["reward"] = r.reward;
    j["q_values_summary"] = ojson{{"chosen", r.q_chosen}, {"max", r.q_max}, {"mean", r.q_mean}, {"count", r.candidates}};
    j["crash"] = opt(r.crash);
    j["outcome"] = r.outcome;
    j["next_entry_id"] = r.next_entry_id;
    j["next_is_new"] = r.next_is_new;
    j["screen_from"] = opt(r.screen_from);
    j["screen_to"] = opt(r.screen_to);
    j["trigger"] = trigger_json(r.trigger);
    os << j.dump() << '\n';
  }
  if (aborted) os << ojson{{"aborted", true}, {"error", error}}.dump() << '\n';
  return os.str();
}

EpisodeLog EpisodeLog::from_ndjson(const std::string& text) {
  EpisodeLog log;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const ojson j = ojson::parse(line);
      if (j.contains("aborted")) {
        log.aborted = j.at("aborted").get<bool>();
        log.error = j.value("error", "");
        continue;
      }
      StepRecord r;
      r.step = j.at("step").get<int>();
      r.page_entry_id = j.at("page_entry_id").get<int>();
      r.is_new_page = j.at("is_new_page").get<bool>();
      const auto& a = j.at("action");
      r.kind = kind_named(a.at("kind").get<std::string>());
      r.target = opt_get<int>(a, "target");
      r.parameter = opt_get<double>(a, "parameter");
      if (a.contains("point") && !a.at("point").is_null()) r.point = Point{a.at("point")[0].get<int>(), a.at("point")[1].get<int>()};
      r.reward = j.at("reward").get<double>();
      const auto& q = j.at("q_values_summary");
      r.q_chosen = q.at("chosen").get<double>();
      r.q_max = q.at("max").get<double>();
      r.q_mean = q.at("mean").get<double>();
      r.candidates = q.at("count").get<int>();
      r.crash = opt_get<int>(j, "crash");
      r.outcome = j.at("outcome").get<std::string>();
      r.next_entry_id = j.at("next_entry_id").get<int>();
      r.next_is_new = j.at("next_is_new").get<bool>();
      r.screen_from = opt_get<int>(j, "screen_from");
      r.screen_to = opt_get<int>(j, "screen_to");
      if (j.contains("trigger") && !j.at("trigger").is_null()) {
        const auto& t = j.at("trigger");
        r.trigger = Trigger{kind_named(t.at("kind").get<std::string>()), t.at("slot").get<int>(), t.at("bucket").get<int>()};
      }
      log.records.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kConfig, "log line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return log;
}

namespace {

struct Observed {
  Image screenshot;
  PageState page;
  std::vector<Action> actions;
  std::shared_ptr<const std::vector<Vec>> embeddings;
  Registration reg;
};

}  // namespace

Explorer::Explorer(ExploreConfig cfg, LayoutEncoder encoder)
    : cfg_(std::move(cfg)),
      encoder_(std::move(encoder)),
      registry_(cfg_.embedding),
      memory_(cfg_.memory_capacity),
      rng_(cfg_.seed),
      train_rng_(Rng::splitmix(cfg_.seed ^ 0x5eedULL)) {
  if (cfg_.batch <= 0 || cfg_.batch % 2 != 0) throw Error(ErrorCode::kConfig, "batch must be a positive even number");
  if (cfg_.train_interval <= 0) throw Error(ErrorCode::kConfig, "train_interval must be positive");
  const int state_dim = cfg_.embedding.widget_dim() + encoder_.dim();
  net_ = QNetwork::random(state_dim + action_dim(cfg_.embedding), cfg_.hidden_width, cfg_.hidden_layers,
                          Rng::splitmix(cfg_.seed + 1));
}

void Explorer::train_step() {
  const auto batch = sample_batch(memory_, static_cast<std::size_t>(cfg_.batch), train_rng_);
  std::vector<QSample> samples;
  samples.reserve(batch.size());
  for (const auto& t : batch) {
    QSample s;
    s.input = t.s;
    s.input.insert(s.input.end(), t.a.begin(), t.a.end());
    s.target = target_q(t, net_, cfg_.gamma);
    samples.push_back(std::move(s));
  }
  net_.train(samples, QTrainConfig{cfg_.epochs, cfg_.learning_rate, cfg_.minibatch}, train_rng_);
  ++trainings_;
}

EpisodeLog Explorer::explore(Environment& env, int budget, const PolicyFn& policy) {
  EpisodeLog log;
  if (budget <= 0) return log;
  auto observe = [&]() {
    Observed o;
    o.screenshot = env.screenshot();
    o.page = page_state(o.screenshot, cfg_.embedding, encoder_);
    o.actions = applicable_actions(o.page, cfg_.platform);
    auto emb = std::make_shared<std::vector<Vec>>();
    emb->reserve(o.actions.size());
    for (const auto& a : o.actions) emb->push_back(embed_action(a, o.page, cfg_.embedding));
    o.embeddings = std::move(emb);
    o.reg = registry_.register_page(o.page, o.actions);
    return o;
  };

  try {
    Observed cur = observe();
    for (int step = 0; step < budget; ++step) {
      StepRecord rec;
      rec.step = step;
      rec.page_entry_id = cur.reg.id;
      rec.is_new_page = cur.reg.is_new;
      rec.candidates = static_cast<int>(cur.actions.size());

      Action action;
      if (policy) {
        action = policy(Observation{cur.screenshot, cur.page, cur.actions}, rng_);
      } else {
        const Selection sel = select_action(net_, cur.page.state_vec, cur.actions, *cur.embeddings, cfg_.tau, rng_);
        action = cur.actions[sel.index];
        rec.q_chosen = sel.q_values[sel.index];
        rec.q_max = *std::max_element(sel.q_values.begin(), sel.q_values.end());
        double sum = 0.0;
        for (double q : sel.q_values) sum += q;
        rec.q_mean = sum / static_cast<double>(sel.q_values.size());
      }
      rec.kind = action.kind;
      rec.target = action.target;
      rec.parameter = action.parameter;
      rec.point = action.point;
      rec.screen_from = env.screen_id();

      const StepOutcome outcome = env.execute(action);
      rec.outcome = outcome_name(outcome);
      rec.trigger = env.fired_trigger();
      if (const auto* c = std::get_if<Crashed>(&outcome)) {
        rec.crash = c->crash_id;
        env.reset();
      }
      rec.screen_to = env.screen_id();

      Observed next = observe();
      const RegistryEntry& dest = registry_.entry(next.reg.id);
      const int source_visits = registry_.entry(cur.reg.id).visits;
      rec.reward = reward(dest.m(), dest.n(), source_visits);
      rec.next_entry_id = next.reg.id;
      rec.next_is_new = next.reg.is_new;

      if (!policy) {
        memory_.push(Transition{cur.page.state_vec, embed_action(action, cur.page, cfg_.embedding),
                                next.page.state_vec, rec.reward, next.embeddings});
      }
      registry_.mark_executed(cur.reg.id, identity_of(action));
      log.records.push_back(rec);

      if (!policy && (step + 1) % cfg_.train_interval == 0 &&
          memory_.size() >= static_cast<std::size_t>(cfg_.batch)) {
        train_step();
      }
      cur = std::move(next);
    }
  } catch (const Error& e) {
    log.aborted = true;
    log.error = e.what();
  }
  return log;
}

}  // namespace pixplore
