#include "pixplore/qnetwork.hpp"

#include <cmath>
#include <string>

#include "pixplore/error.hpp"

namespace pixplore {

namespace {

std::vector<Tensor> shaped(int input_dim, int width, int hidden_layers) {
  if (input_dim <= 0 || width <= 0 || hidden_layers < 0) {
    throw Error(ErrorCode::kInvalidArgument, "network dimensions must be positive");
  }
  std::vector<Tensor> t;
  int in = input_dim;
  for (int l = 0; l < hidden_layers; ++l) {
    t.emplace_back(width, in);
    t.emplace_back(width, 1);
    in = width;
  }
  t.emplace_back(1, in);
  t.emplace_back(1, 1);
  return t;
}

}  // namespace

QNetwork QNetwork::zeros(int input_dim, int width, int hidden_layers) {
  QNetwork net;
  net.tensors_ = shaped(input_dim, width, hidden_layers);
  return net;
}

QNetwork QNetwork::random(int input_dim, int width, int hidden_layers, std::uint64_t seed) {
  QNetwork net = zeros(input_dim, width, hidden_layers);
  Rng rng(seed);
  // The output layer starts at zero so an untrained net ranks all actions
  // equally.
  for (std::size_t i = 0; i + 2 < net.tensors_.size(); i += 2) {
    Tensor& w = net.tensors_[i];
    const double scale = std::sqrt(2.0 / static_cast<double>(w.cols));
    for (auto& x : w.data) x = rng.normal() * scale;
  }
  return net;
}

QNetwork QNetwork::from_tensors(std::vector<Tensor> tensors) {
  if (tensors.size() < 2 || tensors.size() % 2 != 0) {
    throw Error(ErrorCode::kDimensionMismatch, "Q-network needs weight/bias tensor pairs");
  }
  std::size_t in = tensors[0].cols;
  for (std::size_t i = 0; i < tensors.size(); i += 2) {
    const Tensor& w = tensors[i];
    const Tensor& b = tensors[i + 1];
    if (w.cols != in || b.rows != w.rows || b.cols != 1 || w.rows == 0) {
      throw Error(ErrorCode::kDimensionMismatch, "Q-network layer " + std::to_string(i / 2) + " has inconsistent shape");
    }
    in = w.rows;
  }
  if (in != 1) throw Error(ErrorCode::kDimensionMismatch, "Q-network output must be scalar");
  QNetwork net;
  net.tensors_ = std::move(tensors);
  return net;
}

int QNetwork::input_dim() const { return tensors_.empty() ? 0 : static_cast<int>(tensors_[0].cols); }

double QNetwork::forward(std::span<const double> input) const {
  if (tensors_.empty()) throw Error(ErrorCode::kDimensionMismatch, "empty Q-network");
  if (input.size() != tensors_[0].cols) {
    throw Error(ErrorCode::kDimensionMismatch, "Q-network expects input of size " + std::to_string(tensors_[0].cols) +
                                                   ", got " + std::to_string(input.size()));
  }
  std::vector<double> cur(input.begin(), input.end()), next;
  const std::size_t layers = tensors_.size() / 2;
  for (std::size_t l = 0; l < layers; ++l) {
    const Tensor& w = tensors_[2 * l];
    const Tensor& b = tensors_[2 * l + 1];
    next.assign(w.rows, 0.0);
    for (std::size_t r = 0; r < w.rows; ++r) {
      const double* row = &w.data[r * w.cols];
      double acc = b.data[r];
      for (std::size_t c = 0; c < w.cols; ++c) acc += row[c] * cur[c];
      next[r] = (l + 1 < layers) ? std::max(0.0, acc) : acc;
    }
    cur.swap(next);
  }
  return cur[0];
}

double QNetwork::forward(std::span<const double> state, std::span<const double> action) const {
  std::vector<double> x;
  x.reserve(state.size() + action.size());
  x.insert(x.end(), state.begin(), state.end());
  x.insert(x.end(), action.begin(), action.end());
  return forward(x);
}

// Accumulates scale * d(q - target)^2 / dtheta into grad; returns the squared error.
double QNetwork::backward(std::span<const double> input, double target, std::vector<Tensor>& grad, double scale) const {
  if (input.size() != tensors_[0].cols) throw Error(ErrorCode::kDimensionMismatch, "Q-network input size mismatch");
  const std::size_t layers = tensors_.size() / 2;
  std::vector<std::vector<double>> acts(layers + 1);
  acts[0].assign(input.begin(), input.end());
  for (std::size_t l = 0; l < layers; ++l) {
    const Tensor& w = tensors_[2 * l];
    const Tensor& b = tensors_[2 * l + 1];
    auto& out = acts[l + 1];
    out.assign(w.rows, 0.0);
    for (std::size_t r = 0; r < w.rows; ++r) {
      double acc = b.data[r];
      for (std::size_t c = 0; c < w.cols; ++c) acc += w.data[r * w.cols + c] * acts[l][c];
      out[r] = (l + 1 < layers) ? std::max(0.0, acc) : acc;
    }
  }
  const double err = acts[layers][0] - target;
  std::vector<double> delta{2.0 * err * scale}, prev;
  for (std::size_t l = layers; l-- > 0;) {
    const Tensor& w = tensors_[2 * l];
    Tensor& gw = grad[2 * l];
    Tensor& gb = grad[2 * l + 1];
    prev.assign(w.cols, 0.0);
    for (std::size_t r = 0; r < w.rows; ++r) {
      const double d = delta[r];
      if (d == 0.0) continue;
      gb.data[r] += d;
      for (std::size_t c = 0; c < w.cols; ++c) {
        gw.data[r * w.cols + c] += d * acts[l][c];
        prev[c] += d * w.data[r * w.cols + c];
      }
    }
    if (l > 0) {
      for (std::size_t c = 0; c < prev.size(); ++c) {
        if (acts[l][c] <= 0.0) prev[c] = 0.0;
      }
    }
    delta.swap(prev);
  }
  return err * err;
}

double QNetwork::loss(std::span<const QSample> batch, std::vector<Tensor>* grad) const {
  if (batch.empty()) throw Error(ErrorCode::kEmptyTrainingSet, "empty batch");
  std::vector<Tensor> scratch;
  std::vector<Tensor>& g = grad ? *grad : scratch;
  g.clear();
  for (const auto& t : tensors_) g.emplace_back(t.rows, t.cols);
  const double scale = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  for (const auto& s : batch) {
    if (grad) {
      total += backward(s.input, s.target, g, scale);
    } else {
      const double e = forward(s.input) - s.target;
      total += e * e;
    }
  }
  return total * scale;
}

std::vector<double> QNetwork::train(std::span<const QSample> batch, const QTrainConfig& cfg, Rng& rng) {
  if (batch.empty()) throw Error(ErrorCode::kEmptyTrainingSet, "empty training batch");
  if (cfg.minibatch <= 0) throw Error(ErrorCode::kInvalidArgument, "minibatch must be positive");
  std::vector<std::size_t> order(batch.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<Tensor> grad;
  for (const auto& t : tensors_) grad.emplace_back(t.rows, t.cols);
  const std::size_t step = static_cast<std::size_t>(cfg.minibatch);
  std::vector<double> losses;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += step) {
      const std::size_t end = std::min(order.size(), start + step);
      const double scale = 1.0 / static_cast<double>(end - start);
      for (auto& g : grad) std::fill(g.data.begin(), g.data.end(), 0.0);
      for (std::size_t k = start; k < end; ++k) {
        total += backward(batch[order[k]].input, batch[order[k]].target, grad, scale);
      }
      if (!std::isfinite(total)) throw Error(ErrorCode::kTrainingDiverged, "Q-network loss became non-finite");
      for (std::size_t t = 0; t < tensors_.size(); ++t) {
        auto& w = tensors_[t].data;
        const auto& g = grad[t].data;
        for (std::size_t k = 0; k < w.size(); ++k) w[k] -= cfg.learning_rate * g[k];
      }
    }
    losses.push_back(total / static_cast<double>(batch.size()));
  }
  return losses;
}

void QNetwork::save(const std::filesystem::path& path) const { save_weights(path, WeightsKind::kQNetwork, tensors_); }

QNetwork QNetwork::load(const std::filesystem::path& path) {
  return from_tensors(load_weights(path, WeightsKind::kQNetwork));
}

double q_forward(const QNetwork& net, std::span<const double> state, std::span<const double> action) {
  return net.forward(state, action);
}

}  // namespace pixplore
