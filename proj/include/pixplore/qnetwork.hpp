#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "pixplore/rng.hpp"
#include "pixplore/weights_io.hpp"

namespace pixplore {

// One (input, target) regression sample; input = concat(state, action).
struct QSample {
  std::vector<double> input;
  double target = 0.0;
};

struct QTrainConfig {
  int epochs = 5;
  double learning_rate = 0.01;
  int minibatch = 32;  // samples per gradient step
};

// Fully connected net with ReLU hidden layers and a linear scalar output.
class QNetwork {
 public:
  QNetwork() = default;
  // He-initialised hidden weights; zero output layer and biases.
  static QNetwork random(int input_dim, int width, int hidden_layers, std::uint64_t seed);
  static QNetwork zeros(int input_dim, int width, int hidden_layers);
  // Tensors alternate weight (out x in) and bias (out x 1), input layer first.
  static QNetwork from_tensors(std::vector<Tensor> tensors);

  int input_dim() const;
  int layer_count() const { return static_cast<int>(tensors_.size() / 2); }
  const std::vector<Tensor>& tensors() const { return tensors_; }
  std::vector<Tensor>& tensors() { return tensors_; }

  double forward(std::span<const double> input) const;
  double forward(std::span<const double> state, std::span<const double> action) const;

  // Mean squared error over the batch; fills `grad` (same shapes as
  // tensors()) with its gradient when non-null.
  double loss(std::span<const QSample> batch, std::vector<Tensor>* grad = nullptr) const;

  // Mini-batch SGD over shuffled passes of `batch`. Returns the mean loss of
  // each epoch, each sample measured just before the step that uses it.
  // Throws kTrainingDiverged on a non-finite loss.
  std::vector<double> train(std::span<const QSample> batch, const QTrainConfig& cfg, Rng& rng);

  void save(const std::filesystem::path& path) const;
  static QNetwork load(const std::filesystem::path& path);

  bool operator==(const QNetwork&) const = default;

 private:
  double backward(std::span<const double> input, double target, std::vector<Tensor>& grad, double scale) const;

  std::vector<Tensor> tensors_;
};

double q_forward(const QNetwork& net, std::span<const double> state, std::span<const double> action);

}  // namespace pixplore
