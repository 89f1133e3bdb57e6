#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "pixplore/image.hpp"

namespace pixplore {

// Binary edge mask; true marks an edge pixel.
struct EdgeMap {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  bool at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
  std::size_t count() const;
};

struct WidgetBox {
  int x = 0;
  int y = 0;
  int w = 1;
  int h = 1;

  long area() const { return static_cast<long>(w) * h; }
  int right() const { return x + w; }
  int bottom() const { return y + h; }
  bool contains(const WidgetBox& o) const {
    return o.x >= x && o.y >= y && o.right() <= right() && o.bottom() <= bottom();
  }
  bool operator==(const WidgetBox&) const = default;
};

struct VisionConfig {
  double canny_low = 50.0;
  double canny_high = 150.0;
  double gaussian_sigma = 1.4;
  double min_area_fraction = 0.0005;
  int min_side = 4;
  double container_merge_iou = 0.9;
};

// Gaussian smoothing (5x5), Sobel gradients, non-maximum suppression and
// hysteresis with 8-connectivity. Throws kImageTooSmall below 3x3.
EdgeMap canny_edges(const Image& img, double low, double high, double sigma = 1.4);

// Bounding boxes of 8-connected edge components after the noise filters and
// the near-coincident container merge. Sorted by (y, x).
std::vector<WidgetBox> extract_widget_boxes(const EdgeMap& edges, double min_area_fraction, int min_side,
                                            double container_merge_iou = 0.9);

std::vector<WidgetBox> detect_widgets(const Image& img, const VisionConfig& cfg = {});

double iou(const WidgetBox& a, const WidgetBox& b);

// Greedy one-to-one matching in descending IoU order. Pairs are (index in a,
// index in b); only pairs with IoU strictly above the threshold are returned.
std::vector<std::pair<int, int>> match_widgets(const std::vector<WidgetBox>& a, const std::vector<WidgetBox>& b,
                                               double threshold = 0.8);

}  // namespace pixplore
