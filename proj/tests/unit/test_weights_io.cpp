#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>

#include "pixplore/error.hpp"
#include "pixplore/weights_io.hpp"

using namespace pixplore;

TEST_CASE("encoding layout") {
  Tensor t(1, 2);
  t(0, 0) = 1.5;
  t(0, 1) = -2.0;
  const std::vector<Tensor> ts{t};
  const auto bytes = encode_weights(WeightsKind::kQNetwork, ts);
  CHECK(bytes.size() == 4 + 4 + 4 + 4 + 8 + 8 + 2 * 8);
  CHECK(std::memcmp(bytes.data(), "PXWT", 4) == 0);
  std::uint32_t version = 0, kind = 0, count = 0;
  std::memcpy(&version, bytes.data() + 4, 4);
  std::memcpy(&kind, bytes.data() + 8, 4);
  std::memcpy(&count, bytes.data() + 12, 4);
  CHECK(version == kWeightsVersion);
  CHECK(kind == 1);
  CHECK(count == 1);
  double first = 0;
  std::memcpy(&first, bytes.data() + 32, 8);
  CHECK(first == 1.5);
  CHECK(decode_weights(bytes, WeightsKind::kQNetwork) == ts);
}

TEST_CASE("corrupt inputs are rejected") {
  const std::vector<Tensor> ts{Tensor(2, 3, 0.5), Tensor(3, 1, -1)};
  auto bytes = encode_weights(WeightsKind::kLayoutLstm, ts);
  CHECK_THROWS_AS(decode_weights(bytes, WeightsKind::kQNetwork), Error);

  auto truncated = bytes;
  truncated.pop_back();
  CHECK_THROWS_AS(decode_weights(truncated, WeightsKind::kLayoutLstm), Error);

  auto trailing = bytes;
  trailing.push_back(0);
  CHECK_THROWS_AS(decode_weights(trailing, WeightsKind::kLayoutLstm), Error);

  auto magic = bytes;
  magic[0] = 'Q';
  CHECK_THROWS_AS(decode_weights(magic, WeightsKind::kLayoutLstm), Error);

  auto version = bytes;
  version[4] = 9;
  CHECK_THROWS_AS(decode_weights(version, WeightsKind::kLayoutLstm), Error);

  CHECK_THROWS_AS(load_weights("/nonexistent/w.bin", WeightsKind::kQNetwork), Error);
}
