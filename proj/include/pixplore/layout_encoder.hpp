#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pixplore/layout.hpp"
#include "pixplore/weights_io.hpp"

namespace pixplore {

struct LayoutPair {
  LayoutString a;
  LayoutString b;
  double distance = 0.0;
};

struct EncoderTrainConfig {
  int hidden = 32;  // also the embedding dimension
  int epochs = 150;
  double learning_rate = 0.01;
  std::uint64_t seed = 7;
};

// Character-level LSTM over {G, L, C, '{', '}'} followed by a fully connected
// projection of the final hidden state. The structural kind replaces the
// recurrent net with fixed tree statistics and needs no training.
class LayoutEncoder {
 public:
  enum class Kind { kLstm, kStructural };

  LayoutEncoder() = default;
  static LayoutEncoder structural(int dim);
  static LayoutEncoder random_lstm(int hidden, std::uint64_t seed);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }

  std::vector<double> embed(const LayoutString& s) const;

  // Flat weight tensors: W_x (4H x 5), W_h (4H x H), b (4H x 1),
  // W_out (H x H), b_out (H x 1).
  const std::vector<Tensor>& tensors() const { return tensors_; }
  static LayoutEncoder from_tensors(std::vector<Tensor> tensors);

  void save(const std::filesystem::path& path) const;
  static LayoutEncoder load(const std::filesystem::path& path);

  bool operator==(const LayoutEncoder&) const = default;

 private:
  friend class LayoutEncoderTrainer;
  Kind kind_ = Kind::kStructural;
  int dim_ = 32;
  std::vector<Tensor> tensors_;
};

// Regresses ||f(a) - f(b)||_2 onto the pair distance with full-batch Adam.
// Returns the weights that scored best on `validation` (or the final weights
// when it is empty). Throws kEmptyTrainingSet on an empty pair set.
LayoutEncoder train_layout_encoder(const std::vector<LayoutPair>& pairs, const EncoderTrainConfig& cfg,
                                   const std::vector<LayoutPair>& validation = {});

std::vector<double> embed_layout(const LayoutEncoder& enc, const LayoutString& s);

// Random four-level layout strings (distinct), as used for encoder training.
std::vector<LayoutString> random_layout_corpus(std::size_t count, std::uint64_t seed);

struct LayoutDataset {
  std::vector<LayoutPair> train;
  std::vector<LayoutPair> validation;
  std::vector<LayoutPair> test;
};

// All ordered pairs of the corpus, labelled with tree edit distance and split
// 7:1:2 after a seeded shuffle.
LayoutDataset build_layout_dataset(const std::vector<LayoutString>& corpus, std::uint64_t seed);

// Trains on the standard recipe (corpus of `corpus_size` strings).
struct EncoderFit {
  LayoutEncoder encoder;
  double test_spearman = 0.0;
};
EncoderFit fit_default_encoder(std::size_t corpus_size, const EncoderTrainConfig& cfg);

void write_layout_corpus(const std::vector<LayoutString>& corpus, const std::filesystem::path& path);
std::vector<LayoutString> read_layout_corpus(const std::filesystem::path& path);

}  // namespace pixplore
