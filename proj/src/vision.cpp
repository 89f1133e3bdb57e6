#include "pixplore/vision.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <tuple>

#include "pixplore/error.hpp"

namespace pixplore {

std::size_t EdgeMap::count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

namespace {

int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

std::vector<float> gaussian_blur(const Image& img, double sigma) {
  std::array<double, 5> k{};
  double sum = 0.0;
  for (int i = -2; i <= 2; ++i) {
    k[i + 2] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    sum += k[i + 2];
  }
  for (auto& v : k) v /= sum;

  const int w = img.width();
  const int h = img.height();
  std::vector<float> tmp(static_cast<std::size_t>(w) * h);
  std::vector<float> out(tmp.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -2; i <= 2; ++i) acc += k[i + 2] * img.at(clampi(x + i, 0, w - 1), y);
      tmp[static_cast<std::size_t>(y) * w + x] = static_cast<float>(acc);
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -2; i <= 2; ++i) acc += k[i + 2] * tmp[static_cast<std::size_t>(clampi(y + i, 0, h - 1)) * w + x];
      out[static_cast<std::size_t>(y) * w + x] = static_cast<float>(acc);
    }
  }
  return out;
}

}  // namespace

EdgeMap canny_edges(const Image& img, double low, double high, double sigma) {
  if (img.width() < 3 || img.height() < 3) {
    throw Error(ErrorCode::kImageTooSmall, "canny needs at least 3x3 pixels");
  }
  if (low < 0.0 || low > high) throw Error(ErrorCode::kInvalidArgument, "require 0 <= low <= high");

  const int w = img.width();
  const int h = img.height();
  const auto smooth = gaussian_blur(img, sigma);
  auto px = [&](int x, int y) { return smooth[static_cast<std::size_t>(clampi(y, 0, h - 1)) * w + clampi(x, 0, w - 1)]; };

  std::vector<float> mag(static_cast<std::size_t>(w) * h, 0.0f);
  std::vector<std::uint8_t> dir(mag.size(), 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const float gx = (px(x + 1, y - 1) + 2 * px(x + 1, y) + px(x + 1, y + 1)) -
                       (px(x - 1, y - 1) + 2 * px(x - 1, y) + px(x - 1, y + 1));
      const float gy = (px(x - 1, y + 1) + 2 * px(x, y + 1) + px(x + 1, y + 1)) -
                       (px(x - 1, y - 1) + 2 * px(x, y - 1) + px(x + 1, y - 1));
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      mag[i] = std::sqrt(gx * gx + gy * gy);
      // Quantize the gradient direction into 0, 45, 90, 135 degrees.
      const double angle = std::atan2(static_cast<double>(gy), static_cast<double>(gx)) * 180.0 / M_PI;
      const double a = angle < 0 ? angle + 180.0 : angle;
      if (a < 22.5 || a >= 157.5) {
        dir[i] = 0;
      } else if (a < 67.5) {
        dir[i] = 1;
      } else if (a < 112.5) {
        dir[i] = 2;
      } else {
        dir[i] = 3;
      }
    }
  }

  // Non-maximum suppression; strict on the "before" side so plateaus of two
  // equal responses keep exactly one pixel.
  std::vector<float> thin(mag.size(), 0.0f);
  static constexpr std::array<std::array<int, 2>, 4> kStep{{{1, 0}, {1, 1}, {0, 1}, {-1, 1}}};
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      const auto [dx, dy] = kStep[dir[i]];
      const float before = mag[static_cast<std::size_t>(y - dy) * w + (x - dx)];
      const float after = mag[static_cast<std::size_t>(y + dy) * w + (x + dx)];
      if (mag[i] > before && mag[i] >= after) thin[i] = mag[i];
    }
  }

  EdgeMap out{w, h, std::vector<std::uint8_t>(mag.size(), 0)};
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < thin.size(); ++i) {
    if (thin[i] >= high && !out.bits[i]) {
      out.bits[i] = 1;
      stack.push_back(i);
      while (!stack.empty()) {
        const std::size_t cur = stack.back();
        stack.pop_back();
        const int cx = static_cast<int>(cur % w);
        const int cy = static_cast<int>(cur / w);
        for (int ny = std::max(0, cy - 1); ny <= std::min(h - 1, cy + 1); ++ny) {
          for (int nx = std::max(0, cx - 1); nx <= std::min(w - 1, cx + 1); ++nx) {
            const std::size_t j = static_cast<std::size_t>(ny) * w + nx;
            if (!out.bits[j] && thin[j] >= low) {
              out.bits[j] = 1;
              stack.push_back(j);
            }
          }
        }
      }
    }
  }
  return out;
}

std::vector<WidgetBox> extract_widget_boxes(const EdgeMap& edges, double min_area_fraction, int min_side,
                                            double container_merge_iou) {
  if (min_area_fraction < 0.0 || min_area_fraction > 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "min_area_fraction must lie in [0, 1]");
  }
  const int w = edges.width;
  const int h = edges.height;
  const double min_area = min_area_fraction * static_cast<double>(w) * h;

  std::vector<std::uint8_t> seen(edges.bits.size(), 0);
  std::vector<WidgetBox> boxes;
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < edges.bits.size(); ++start) {
    if (!edges.bits[start] || seen[start]) continue;
    int x0 = w, y0 = h, x1 = -1, y1 = -1;
    seen[start] = 1;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t cur = stack.back();
      stack.pop_back();
      const int cx = static_cast<int>(cur % w);
      const int cy = static_cast<int>(cur / w);
      x0 = std::min(x0, cx);
      y0 = std::min(y0, cy);
      x1 = std::max(x1, cx);
      y1 = std::max(y1, cy);
      for (int ny = std::max(0, cy - 1); ny <= std::min(h - 1, cy + 1); ++ny) {
        for (int nx = std::max(0, cx - 1); nx <= std::min(w - 1, cx + 1); ++nx) {
          const std::size_t j = static_cast<std::size_t>(ny) * w + nx;
          if (edges.bits[j] && !seen[j]) {
            seen[j] = 1;
            stack.push_back(j);
          }
        }
      }
    }
    WidgetBox b{x0, y0, x1 - x0 + 1, y1 - y0 + 1};
    if (b.w < min_side || b.h < min_side || static_cast<double>(b.area()) < min_area) continue;
    boxes.push_back(b);
  }

  std::sort(boxes.begin(), boxes.end(), [](const WidgetBox& a, const WidgetBox& b) {
    return std::tie(a.y, a.x, a.h, a.w) < std::tie(b.y, b.x, b.h, b.w);
  });

  // Fold boxes that sit inside a near-coincident container into it.
  std::vector<bool> drop(boxes.size(), false);
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    for (std::size_t j = 0; j < boxes.size(); ++j) {
      if (i == j || drop[j]) continue;
      if (boxes[j].contains(boxes[i]) && !(boxes[i] == boxes[j]) && iou(boxes[i], boxes[j]) > container_merge_iou) {
        drop[i] = true;
        break;
      }
    }
  }
  std::vector<WidgetBox> out;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    if (!drop[i] && (out.empty() || !(out.back() == boxes[i]))) out.push_back(boxes[i]);
  }
  return out;
}

std::vector<WidgetBox> detect_widgets(const Image& img, const VisionConfig& cfg) {
  return extract_widget_boxes(canny_edges(img, cfg.canny_low, cfg.canny_high, cfg.gaussian_sigma),
                              cfg.min_area_fraction, cfg.min_side, cfg.container_merge_iou);
}

double iou(const WidgetBox& a, const WidgetBox& b) {
  const long ix = std::max(0, std::min(a.right(), b.right()) - std::max(a.x, b.x));
  const long iy = std::max(0, std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y));
  const long inter = ix * iy;
  if (inter == 0) return 0.0;
  const long uni = a.area() + b.area() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<std::pair<int, int>> match_widgets(const std::vector<WidgetBox>& a, const std::vector<WidgetBox>& b,
                                               double threshold) {
  struct Candidate {
    double iou;
    int i;
    int j;
  };
  std::vector<Candidate> cands;
  for (int i = 0; i < static_cast<int>(a.size()); ++i) {
    for (int j = 0; j < static_cast<int>(b.size()); ++j) {
      const double v = iou(a[i], b[j]);
      if (v > threshold) cands.push_back({v, i, j});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Candidate& l, const Candidate& r) {
    if (l.iou != r.iou) return l.iou > r.iou;
    if (l.i != r.i) return l.i < r.i;
    return l.j < r.j;
  });
  std::vector<bool> used_a(a.size(), false), used_b(b.size(), false);
  std::vector<std::pair<int, int>> out;
  for (const auto& c : cands) {
    if (used_a[c.i] || used_b[c.j]) continue;
    used_a[c.i] = used_b[c.j] = true;
    out.emplace_back(c.i, c.j);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace pixplore
