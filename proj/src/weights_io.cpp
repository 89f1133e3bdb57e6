#include "pixplore/weights_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "pixplore/error.hpp"

namespace pixplore {

namespace {

static_assert(std::endian::native == std::endian::little, "weights format assumes a little-endian host");

template <typename T>
void put(std::vector<std::uint8_t>& out, T v) {
  std::uint8_t buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.insert(out.end(), buf, buf + sizeof(T));
}

template <typename T>
T take(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  if (pos + sizeof(T) > bytes.size()) throw Error(ErrorCode::kIo, "truncated weights file");
  T v;
  std::memcpy(&v, bytes.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

constexpr char kMagic[4] = {'P', 'X', 'W', 'T'};

}  // namespace

std::vector<std::uint8_t> encode_weights(WeightsKind kind, std::span<const Tensor> tensors) {
  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  put<std::uint32_t>(out, kWeightsVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(kind));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    put<std::uint64_t>(out, t.rows);
    put<std::uint64_t>(out, t.cols);
    for (double v : t.data) put<double>(out, v);
  }
  return out;
}

std::vector<Tensor> decode_weights(std::span<const std::uint8_t> bytes, WeightsKind expected) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(ErrorCode::kIo, "bad weights magic");
  }
  std::size_t pos = 4;
  const auto version = take<std::uint32_t>(bytes, pos);
  if (version != kWeightsVersion) throw Error(ErrorCode::kIo, "unsupported weights version " + std::to_string(version));
  const auto kind = take<std::uint32_t>(bytes, pos);
  if (kind != static_cast<std::uint32_t>(expected)) throw Error(ErrorCode::kIo, "weights file holds a different model kind");
  const auto count = take<std::uint32_t>(bytes, pos);
  std::vector<Tensor> tensors;
  tensors.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto rows = take<std::uint64_t>(bytes, pos);
    const auto cols = take<std::uint64_t>(bytes, pos);
    if (rows * cols > (bytes.size() - pos) / sizeof(double)) throw Error(ErrorCode::kIo, "truncated weights file");
    Tensor t(rows, cols);
    for (auto& v : t.data) v = take<double>(bytes, pos);
    tensors.push_back(std::move(t));
  }
  if (pos != bytes.size()) throw Error(ErrorCode::kIo, "trailing bytes in weights file");
  return tensors;
}

void save_weights(const std::filesystem::path& path, WeightsKind kind, std::span<const Tensor> tensors) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  const auto bytes = encode_weights(kind, tensors);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::vector<Tensor> load_weights(const std::filesystem::path& path, WeightsKind expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_weights(bytes, expected);
}

}  // namespace pixplore
