#include "pixplore/layout_encoder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>

#include "pixplore/error.hpp"
#include "pixplore/rng.hpp"
#include "pixplore/stats.hpp"

namespace pixplore {

namespace {

constexpr int kVocab = 5;

int symbol_index(char c) {
  switch (c) {
    case 'G': return 0;
    case 'L': return 1;
    case 'C': return 2;
    case '{': return 3;
    case '}': return 4;
    default: throw Error(ErrorCode::kMalformedLayout, std::string("unexpected character '") + c + "'");
  }
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

enum TensorSlot { kWx = 0, kWh = 1, kB = 2, kWout = 3, kBout = 4 };

// Per-step activations kept for backpropagation through time.
struct Trace {
  std::vector<int> symbols;
  std::vector<std::vector<double>> h;  // h[0] is the zero initial state
  std::vector<std::vector<double>> c;
  std::vector<std::vector<double>> gates;  // i, f, g, o after nonlinearity
  std::vector<double> out;
};

Trace run_lstm(const std::vector<Tensor>& w, const std::string& text) {
  const int hid = static_cast<int>(w[kWh].cols);
  Trace tr;
  tr.h.emplace_back(hid, 0.0);
  tr.c.emplace_back(hid, 0.0);
  for (char ch : text) {
    const int s = symbol_index(ch);
    tr.symbols.push_back(s);
    const auto& hp = tr.h.back();
    const auto& cp = tr.c.back();
    std::vector<double> gate(4 * hid);
    for (int r = 0; r < 4 * hid; ++r) {
      double z = w[kB].data[r] + w[kWx](r, s);
      const double* row = &w[kWh].data[static_cast<std::size_t>(r) * hid];
      for (int k = 0; k < hid; ++k) z += row[k] * hp[k];
      gate[r] = (r >= 2 * hid && r < 3 * hid) ? std::tanh(z) : sigmoid(z);
    }
    std::vector<double> c(hid), h(hid);
    for (int k = 0; k < hid; ++k) {
      c[k] = gate[hid + k] * cp[k] + gate[k] * gate[2 * hid + k];
      h[k] = gate[3 * hid + k] * std::tanh(c[k]);
    }
    tr.gates.push_back(std::move(gate));
    tr.c.push_back(std::move(c));
    tr.h.push_back(std::move(h));
  }
  const auto& hT = tr.h.back();
  tr.out.assign(w[kWout].rows, 0.0);
  for (std::size_t r = 0; r < w[kWout].rows; ++r) {
    double v = w[kBout].data[r];
    for (int k = 0; k < hid; ++k) v += w[kWout](r, k) * hT[k];
    tr.out[r] = v;
  }
  return tr;
}

void backprop(const std::vector<Tensor>& w, const Trace& tr, const std::vector<double>& dout,
              std::vector<Tensor>& grad) {
  const int hid = static_cast<int>(w[kWh].cols);
  const auto& hT = tr.h.back();
  std::vector<double> dh(hid, 0.0), dc(hid, 0.0);
  for (std::size_t r = 0; r < w[kWout].rows; ++r) {
    grad[kBout].data[r] += dout[r];
    for (int k = 0; k < hid; ++k) {
      grad[kWout](r, k) += dout[r] * hT[k];
      dh[k] += w[kWout](r, k) * dout[r];
    }
  }
  std::vector<double> dz(4 * hid);
  for (std::size_t t = tr.symbols.size(); t-- > 0;) {
    const auto& g = tr.gates[t];
    const auto& c = tr.c[t + 1];
    const auto& cprev = tr.c[t];
    const auto& hprev = tr.h[t];
    for (int k = 0; k < hid; ++k) {
      const double tc = std::tanh(c[k]);
      const double gi = g[k], gf = g[hid + k], gg = g[2 * hid + k], go = g[3 * hid + k];
      const double d_o = dh[k] * tc;
      dc[k] += dh[k] * go * (1.0 - tc * tc);
      dz[k] = dc[k] * gg * gi * (1.0 - gi);
      dz[hid + k] = dc[k] * cprev[k] * gf * (1.0 - gf);
      dz[2 * hid + k] = dc[k] * gi * (1.0 - gg * gg);
      dz[3 * hid + k] = d_o * go * (1.0 - go);
      dc[k] *= gf;
    }
    std::fill(dh.begin(), dh.end(), 0.0);
    const int s = tr.symbols[t];
    for (int r = 0; r < 4 * hid; ++r) {
      const double d = dz[r];
      if (d == 0.0) continue;
      grad[kB].data[r] += d;
      grad[kWx](r, s) += d;
      double* grow = &grad[kWh].data[static_cast<std::size_t>(r) * hid];
      const double* wrow = &w[kWh].data[static_cast<std::size_t>(r) * hid];
      for (int k = 0; k < hid; ++k) {
        grow[k] += d * hprev[k];
        dh[k] += wrow[k] * d;
      }
    }
  }
}

std::vector<double> structural_features(const LayoutString& s, int dim) {
  const LayoutTree t = parse_layout(s);
  std::vector<double> f;
  double groups = 0, lines = 0, cols = 0, max_lines = 0, max_cols = 0;
  std::vector<double> cols_hist(8, 0.0);
  for (const auto& g : t.root.children) {
    groups += 1;
    lines += static_cast<double>(g.children.size());
    max_lines = std::max(max_lines, static_cast<double>(g.children.size()));
    for (const auto& l : g.children) {
      cols += static_cast<double>(l.children.size());
      max_cols = std::max(max_cols, static_cast<double>(l.children.size()));
      cols_hist[std::min<std::size_t>(l.children.size(), 8) - (l.children.empty() ? 0 : 1)] += 1;
    }
  }
  f = {groups, lines, cols, static_cast<double>(node_count(t)), static_cast<double>(t.depth()), max_lines, max_cols,
       groups > 0 ? lines / groups : 0.0, lines > 0 ? cols / lines : 0.0};
  f.insert(f.end(), cols_hist.begin(), cols_hist.end());
  // Per-group line counts in reading order.
  for (const auto& g : t.root.children) f.push_back(static_cast<double>(g.children.size()));
  f.resize(static_cast<std::size_t>(dim), 0.0);
  return f;
}

}  // namespace

LayoutEncoder LayoutEncoder::structural(int dim) {
  if (dim < 1) throw Error(ErrorCode::kInvalidArgument, "encoder dimension must be positive");
  LayoutEncoder e;
  e.kind_ = Kind::kStructural;
  e.dim_ = dim;
  return e;
}

LayoutEncoder LayoutEncoder::random_lstm(int hidden, std::uint64_t seed) {
  if (hidden < 1) throw Error(ErrorCode::kInvalidArgument, "encoder dimension must be positive");
  Rng rng(seed);
  const auto h = static_cast<std::size_t>(hidden);
  const double scale = 1.0 / std::sqrt(static_cast<double>(hidden));
  std::vector<Tensor> t{Tensor(4 * h, kVocab), Tensor(4 * h, h), Tensor(4 * h, 1), Tensor(h, h), Tensor(h, 1)};
  for (int slot : {kWx, kWh, kWout}) {
    for (auto& v : t[slot].data) v = rng.uniform(-scale, scale);
  }
  for (std::size_t k = 0; k < h; ++k) t[kB].data[h + k] = 1.0;  // forget-gate bias
  LayoutEncoder e;
  e.kind_ = Kind::kLstm;
  e.dim_ = hidden;
  e.tensors_ = std::move(t);
  return e;
}

LayoutEncoder LayoutEncoder::from_tensors(std::vector<Tensor> tensors) {
  if (tensors.size() != 5) throw Error(ErrorCode::kIo, "layout encoder needs 5 tensors");
  const std::size_t h = tensors[kWh].cols;
  if (h == 0 || tensors[kWx].rows != 4 * h || tensors[kWx].cols != kVocab || tensors[kWh].rows != 4 * h ||
      tensors[kB].rows != 4 * h || tensors[kWout].cols != h || tensors[kBout].rows != tensors[kWout].rows) {
    throw Error(ErrorCode::kDimensionMismatch, "inconsistent layout encoder tensor shapes");
  }
  LayoutEncoder e;
  e.kind_ = Kind::kLstm;
  e.dim_ = static_cast<int>(tensors[kWout].rows);
  e.tensors_ = std::move(tensors);
  return e;
}

std::vector<double> LayoutEncoder::embed(const LayoutString& s) const {
  if (kind_ == Kind::kStructural) return structural_features(s, dim_);
  parse_layout(s);  // validates structure, not just the alphabet
  return run_lstm(tensors_, s.text).out;
}

void LayoutEncoder::save(const std::filesystem::path& path) const {
  if (kind_ != Kind::kLstm) throw Error(ErrorCode::kInvalidArgument, "only the LSTM encoder has weights to save");
  save_weights(path, WeightsKind::kLayoutLstm, tensors_);
}

LayoutEncoder LayoutEncoder::load(const std::filesystem::path& path) {
  return from_tensors(load_weights(path, WeightsKind::kLayoutLstm));
}

std::vector<double> embed_layout(const LayoutEncoder& enc, const LayoutString& s) { return enc.embed(s); }

class LayoutEncoderTrainer {
 public:
  static LayoutEncoder train(const std::vector<LayoutPair>& pairs, const EncoderTrainConfig& cfg,
                             const std::vector<LayoutPair>& validation) {
    if (pairs.empty()) throw Error(ErrorCode::kEmptyTrainingSet, "no layout pairs to train on");

    std::map<std::string, int> ids;
    std::vector<std::string> strings;
    auto intern = [&](const LayoutString& s) {
      auto [it, inserted] = ids.emplace(s.text, static_cast<int>(strings.size()));
      if (inserted) {
        parse_layout(s);
        strings.push_back(s.text);
      }
      return it->second;
    };
    struct Indexed {
      int a, b;
      double d;
    };
    auto index_all = [&](const std::vector<LayoutPair>& src) {
      std::vector<Indexed> out;
      out.reserve(src.size());
      for (const auto& p : src) out.push_back({intern(p.a), intern(p.b), p.distance});
      return out;
    };
    const auto train_set = index_all(pairs);
    const auto val_set = index_all(validation);

    LayoutEncoder enc = LayoutEncoder::random_lstm(cfg.hidden, cfg.seed);
    auto& w = enc.tensors_;
    std::vector<Tensor> m, v;
    for (const auto& t : w) {
      m.emplace_back(t.rows, t.cols);
      v.emplace_back(t.rows, t.cols);
    }
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

    auto pair_loss = [](const std::vector<std::vector<double>>& emb, const std::vector<Indexed>& set) {
      double loss = 0.0;
      for (const auto& p : set) {
        double sq = 0.0;
        for (std::size_t k = 0; k < emb[p.a].size(); ++k) {
          const double diff = emb[p.a][k] - emb[p.b][k];
          sq += diff * diff;
        }
        const double r = std::sqrt(sq) - p.d;
        loss += r * r;
      }
      return set.empty() ? 0.0 : loss / static_cast<double>(set.size());
    };

    double best_val = std::numeric_limits<double>::infinity();
    std::vector<Tensor> best = w;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      std::vector<Trace> traces;
      traces.reserve(strings.size());
      std::vector<std::vector<double>> emb;
      for (const auto& s : strings) {
        traces.push_back(run_lstm(w, s));
        emb.push_back(traces.back().out);
      }
      if (!val_set.empty()) {
        const double val = pair_loss(emb, val_set);
        if (val < best_val) {
          best_val = val;
          best = w;
        }
      }

      std::vector<std::vector<double>> dout(strings.size(), std::vector<double>(static_cast<std::size_t>(enc.dim_), 0.0));
      const double inv_n = 1.0 / static_cast<double>(train_set.size());
      double loss = 0.0;
      for (const auto& p : train_set) {
        if (p.a == p.b) continue;  // identical inputs embed identically
        std::vector<double> diff(static_cast<std::size_t>(enc.dim_));
        double sq = 0.0;
        for (std::size_t k = 0; k < diff.size(); ++k) {
          diff[k] = emb[p.a][k] - emb[p.b][k];
          sq += diff[k] * diff[k];
        }
        const double dist = std::sqrt(sq);
        const double r = dist - p.d;
        loss += r * r * inv_n;
        if (dist < 1e-12) continue;
        const double scale = 2.0 * r * inv_n / dist;
        for (std::size_t k = 0; k < diff.size(); ++k) {
          dout[p.a][k] += scale * diff[k];
          dout[p.b][k] -= scale * diff[k];
        }
      }
      if (!std::isfinite(loss)) throw Error(ErrorCode::kTrainingDiverged, "layout encoder loss is not finite");

      std::vector<Tensor> grad;
      for (const auto& t : w) grad.emplace_back(t.rows, t.cols);
      for (std::size_t i = 0; i < strings.size(); ++i) backprop(w, traces[i], dout[i], grad);

      const double bc1 = 1.0 - std::pow(beta1, epoch + 1);
      const double bc2 = 1.0 - std::pow(beta2, epoch + 1);
      for (std::size_t t = 0; t < w.size(); ++t) {
        for (std::size_t k = 0; k < w[t].data.size(); ++k) {
          const double g = grad[t].data[k];
          m[t].data[k] = beta1 * m[t].data[k] + (1.0 - beta1) * g;
          v[t].data[k] = beta2 * v[t].data[k] + (1.0 - beta2) * g * g;
          w[t].data[k] -= cfg.learning_rate * (m[t].data[k] / bc1) / (std::sqrt(v[t].data[k] / bc2) + eps);
        }
      }
    }
    if (!val_set.empty()) {
      std::vector<std::vector<double>> emb;
      for (const auto& s : strings) emb.push_back(run_lstm(w, s).out);
      if (pair_loss(emb, val_set) < best_val) best = w;
      w = std::move(best);
    }
    return enc;
  }
};

LayoutEncoder train_layout_encoder(const std::vector<LayoutPair>& pairs, const EncoderTrainConfig& cfg,
                                   const std::vector<LayoutPair>& validation) {
  return LayoutEncoderTrainer::train(pairs, cfg, validation);
}

std::vector<LayoutString> random_layout_corpus(std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::set<std::string> seen;
  std::vector<LayoutString> out;
  while (out.size() < count) {
    LayoutTree t;
    const int groups = rng.range(1, 4);
    for (int g = 0; g < groups; ++g) {
      LayoutNode group{'G', -1, {}};
      const int lines = rng.range(1, 3);
      for (int l = 0; l < lines; ++l) {
        LayoutNode line{'L', -1, {}};
        const int cols = rng.range(1, 4);
        for (int c = 0; c < cols; ++c) line.children.push_back(LayoutNode{'C', -1, {}});
        group.children.push_back(std::move(line));
      }
      t.root.children.push_back(std::move(group));
    }
    LayoutString s = serialize_tree(t);
    if (seen.insert(s.text).second) out.push_back(std::move(s));
  }
  return out;
}

LayoutDataset build_layout_dataset(const std::vector<LayoutString>& corpus, std::uint64_t seed) {
  std::vector<LayoutTree> trees;
  for (const auto& s : corpus) trees.push_back(parse_layout(s));
  std::vector<LayoutPair> all;
  all.reserve(corpus.size() * corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    for (std::size_t j = 0; j < corpus.size(); ++j) {
      all.push_back({corpus[i], corpus[j], static_cast<double>(tree_edit_distance(trees[i], trees[j]))});
    }
  }
  Rng rng(seed);
  rng.shuffle(all);
  const std::size_t n_train = all.size() * 7 / 10;
  const std::size_t n_val = all.size() / 10;
  LayoutDataset ds;
  ds.train.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n_train));
  ds.validation.assign(all.begin() + static_cast<std::ptrdiff_t>(n_train),
                       all.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  ds.test.assign(all.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), all.end());
  return ds;
}

EncoderFit fit_default_encoder(std::size_t corpus_size, const EncoderTrainConfig& cfg) {
  const auto corpus = random_layout_corpus(corpus_size, cfg.seed);
  const auto ds = build_layout_dataset(corpus, Rng::splitmix(cfg.seed));
  EncoderFit fit{train_layout_encoder(ds.train, cfg, ds.validation), 0.0};
  std::vector<double> predicted, truth;
  std::map<std::string, std::vector<double>> cache;
  auto emb = [&](const LayoutString& s) -> const std::vector<double>& {
    auto it = cache.find(s.text);
    if (it == cache.end()) it = cache.emplace(s.text, fit.encoder.embed(s)).first;
    return it->second;
  };
  for (const auto& p : ds.test) {
    const auto& a = emb(p.a);
    const auto& b = emb(p.b);
    double sq = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) sq += (a[k] - b[k]) * (a[k] - b[k]);
    predicted.push_back(std::sqrt(sq));
    truth.push_back(p.distance);
  }
  fit.test_spearman = spearman(predicted, truth);
  return fit;
}

void write_layout_corpus(const std::vector<LayoutString>& corpus, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  for (const auto& s : corpus) out << s.text << '\n';
}

std::vector<LayoutString> read_layout_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<LayoutString> out;
  for (std::string line; std::getline(in, line);) {
    LayoutString s{line};
    parse_layout(s);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace pixplore
