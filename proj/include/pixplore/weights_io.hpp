#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace pixplore {

// Row-major real matrix used for persisted weights.
struct Tensor {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  bool operator==(const Tensor&) const = default;
};

enum class WeightsKind : std::uint32_t { kQNetwork = 1, kLayoutLstm = 2 };

// Versioned flat binary layout (little-endian):
//   "PXWT" | u32 version | u32 kind | u32 tensor count |
//   per tensor: u64 rows | u64 cols | rows*cols f64 row-major
inline constexpr std::uint32_t kWeightsVersion = 1;

std::vector<std::uint8_t> encode_weights(WeightsKind kind, std::span<const Tensor> tensors);
std::vector<Tensor> decode_weights(std::span<const std::uint8_t> bytes, WeightsKind expected);

void save_weights(const std::filesystem::path& path, WeightsKind kind, std::span<const Tensor> tensors);
std::vector<Tensor> load_weights(const std::filesystem::path& path, WeightsKind expected);

}  // namespace pixplore
