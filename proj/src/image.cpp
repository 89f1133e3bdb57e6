#include "pixplore/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "pixplore/error.hpp"

namespace pixplore {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kImageTooSmall: return "image-too-small";
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kDegenerateBox: return "degenerate-box";
    case ErrorCode::kMalformedLayout: return "malformed-layout-string";
    case ErrorCode::kEmptyTrainingSet: return "empty-training-set";
    case ErrorCode::kDimensionMismatch: return "dimension-mismatch";
    case ErrorCode::kTrainingDiverged: return "training-diverged";
    case ErrorCode::kInsufficientMemory: return "insufficient-memory";
    case ErrorCode::kInvalidScreen: return "invalid-screen";
    case ErrorCode::kGenerationInfeasible: return "generation-infeasible";
    case ErrorCode::kTargetOutOfRange: return "target-out-of-range";
    case ErrorCode::kConfig: return "config-error";
    case ErrorCode::kUniverseMismatch: return "universe-mismatch";
    case ErrorCode::kEmptyLog: return "empty-log";
    case ErrorCode::kIo: return "io-error";
    case ErrorCode::kEnvironment: return "environment-failure";
  }
  return "unknown";
}

Image::Image(int width, int height, std::uint8_t fill) : width_(width), height_(height) {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::kInvalidArgument, "image dimensions must be positive");
  }
  pixels_.assign(static_cast<std::size_t>(width) * height, fill);
}

Image::Image(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width < 1 || height < 1 || pixels_.size() != static_cast<std::size_t>(width) * height) {
    throw Error(ErrorCode::kInvalidArgument, "pixel buffer does not match dimensions");
  }
}

void Image::fill_rect(int x, int y, int w, int h, std::uint8_t value) {
  const int x0 = std::max(0, x);
  const int y0 = std::max(0, y);
  const int x1 = std::min(width_, x + w);
  const int y1 = std::min(height_, y + h);
  for (int yy = y0; yy < y1; ++yy) {
    std::fill_n(pixels_.begin() + static_cast<std::ptrdiff_t>(yy) * width_ + x0, std::max(0, x1 - x0), value);
  }
}

Image from_rgb(int width, int height, std::span<const std::uint8_t> rgb) {
  if (rgb.size() != static_cast<std::size_t>(width) * height * 3) {
    throw Error(ErrorCode::kInvalidArgument, "rgb buffer does not match dimensions");
  }
  std::vector<std::uint8_t> gray(static_cast<std::size_t>(width) * height);
  for (std::size_t i = 0; i < gray.size(); ++i) {
    const double luma = 0.299 * rgb[3 * i] + 0.587 * rgb[3 * i + 1] + 0.114 * rgb[3 * i + 2];
    gray[i] = static_cast<std::uint8_t>(std::clamp(std::lround(luma), 0L, 255L));
  }
  return Image(width, height, std::move(gray));
}

std::vector<std::uint8_t> encode_pgm(const Image& img) {
  const std::string header =
      "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.pixels().begin(), img.pixels().end());
  return out;
}

namespace {

// Reads the next whitespace-delimited header token, skipping '#' comments.
std::string next_token(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(bytes[pos])) {
      ++pos;
    } else {
      break;
    }
  }
  std::string tok;
  while (pos < bytes.size() && !std::isspace(bytes[pos])) tok.push_back(static_cast<char>(bytes[pos++]));
  return tok;
}

}  // namespace

Image decode_pgm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  if (next_token(bytes, pos) != "P5") throw Error(ErrorCode::kIo, "not a binary PGM (P5)");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(next_token(bytes, pos));
    h = std::stoi(next_token(bytes, pos));
    maxval = std::stoi(next_token(bytes, pos));
  } catch (const std::exception&) {
    throw Error(ErrorCode::kIo, "malformed PGM header");
  }
  if (maxval != 255) throw Error(ErrorCode::kIo, "only maxval 255 is supported");
  ++pos;  // single whitespace after maxval
  const std::size_t n = static_cast<std::size_t>(w) * h;
  if (w < 1 || h < 1 || bytes.size() < pos + n) throw Error(ErrorCode::kIo, "truncated PGM payload");
  return Image(w, h, std::vector<std::uint8_t>(bytes.begin() + pos, bytes.begin() + pos + n));
}

void write_pgm(const Image& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  const auto bytes = encode_pgm(img);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

Image read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_pgm(bytes);
}

}  // namespace pixplore
