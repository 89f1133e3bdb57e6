#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace pixplore {

// Row-major 8-bit grayscale screenshot.
class Image {
 public:
  Image() = default;
  Image(int width, int height, std::uint8_t fill = 0);
  Image(int width, int height, std::vector<std::uint8_t> pixels);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return pixels_.empty(); }

  std::uint8_t at(int x, int y) const { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
  std::uint8_t& at(int x, int y) { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }

  std::span<const std::uint8_t> pixels() const { return pixels_; }

  // Fill the rectangle [x, x+w) x [y, y+h), clipped to the image.
  void fill_rect(int x, int y, int w, int h, std::uint8_t value);

  bool operator==(const Image&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

// Luma conversion for RGB sources: 0.299 R + 0.587 G + 0.114 B.
Image from_rgb(int width, int height, std::span<const std::uint8_t> rgb);

// Binary PGM ("P5", maxval 255).
void write_pgm(const Image& img, const std::filesystem::path& path);
Image read_pgm(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_pgm(const Image& img);
Image decode_pgm(std::span<const std::uint8_t> bytes);

}  // namespace pixplore
