#include "pixplore/embedding.hpp"

#include <algorithm>
#include <cmath>

#include "pixplore/error.hpp"

namespace pixplore {

namespace {

int grid_side(int d, const char* what) {
  const int s = static_cast<int>(std::lround(std::sqrt(static_cast<double>(d))));
  if (d <= 0 || s * s != d) throw Error(ErrorCode::kInvalidArgument, std::string(what) + " must be a perfect square");
  return s;
}

WidgetBox clip(const WidgetBox& b, int w, int h) {
  const int x0 = std::max(0, b.x), y0 = std::max(0, b.y);
  const int x1 = std::min(w, b.right()), y1 = std::min(h, b.bottom());
  return WidgetBox{x0, y0, std::max(0, x1 - x0), std::max(0, y1 - y0)};
}

}  // namespace

std::vector<WidgetBox> PageState::boxes() const {
  std::vector<WidgetBox> out;
  out.reserve(widgets.size());
  for (const auto& w : widgets) out.push_back(w.box);
  return out;
}

Vec embed_widget_image(const Image& img, const WidgetBox& box, int d_img) {
  const int n = grid_side(d_img, "d_img");
  const WidgetBox b = clip(box, img.width(), img.height());
  if (b.area() == 0) throw Error(ErrorCode::kDegenerateBox, "widget box has zero area inside the image");
  Vec out(static_cast<std::size_t>(d_img));
  auto px = [&](int x, int y) { return static_cast<double>(img.at(b.x + x, b.y + y)); };
  for (int r = 0; r < n; ++r) {
    const double sy = std::clamp((r + 0.5) * b.h / n - 0.5, 0.0, b.h - 1.0);
    const int y0 = static_cast<int>(std::floor(sy));
    const int y1 = std::min(y0 + 1, b.h - 1);
    const double fy = sy - y0;
    for (int c = 0; c < n; ++c) {
      const double sx = std::clamp((c + 0.5) * b.w / n - 0.5, 0.0, b.w - 1.0);
      const int x0 = static_cast<int>(std::floor(sx));
      const int x1 = std::min(x0 + 1, b.w - 1);
      const double fx = sx - x0;
      const double top = px(x0, y0) * (1 - fx) + px(x1, y0) * fx;
      const double bot = px(x0, y1) * (1 - fx) + px(x1, y1) * fx;
      out[static_cast<std::size_t>(r * n + c)] = (top * (1 - fy) + bot * fy) / 255.0;
    }
  }
  return out;
}

Vec embed_widget_location(const WidgetBox& box, int screen_width, int screen_height, int d_loc) {
  const int n = grid_side(d_loc, "d_loc");
  if (screen_width <= 0 || screen_height <= 0) throw Error(ErrorCode::kInvalidArgument, "screen must be non-empty");
  const WidgetBox b = clip(box, screen_width, screen_height);
  const double cw = static_cast<double>(screen_width) / n, ch = static_cast<double>(screen_height) / n;
  Vec out(static_cast<std::size_t>(d_loc), 0.0);
  for (int r = 0; r < n; ++r) {
    const double oy = std::max(0.0, std::min<double>(b.bottom(), (r + 1) * ch) - std::max<double>(b.y, r * ch));
    for (int c = 0; c < n; ++c) {
      const double ox = std::max(0.0, std::min<double>(b.right(), (c + 1) * cw) - std::max<double>(b.x, c * cw));
      out[static_cast<std::size_t>(r * n + c)] = std::clamp(ox * oy / (cw * ch), 0.0, 1.0);
    }
  }
  return out;
}

namespace {

struct Region {
  double sum = 0;
  int count = 0;
  void add(double v) {
    sum += v;
    ++count;
  }
  double mean(double fallback) const { return count > 0 ? sum / count : fallback; }
};

}  // namespace

PatchFeatures measure_patch(const Image& img, const WidgetBox& box) {
  const WidgetBox b = clip(box, img.width(), img.height());
  PatchFeatures f;
  if (b.area() == 0) return f;
  f.aspect = static_cast<double>(b.w) / b.h;
  f.width_fraction = static_cast<double>(b.w) / img.width();

  // Background: median of a band two to four pixels outside the box.
  std::vector<std::uint8_t> band;
  for (int y = b.y - 4; y < b.bottom() + 4; ++y) {
    for (int x = b.x - 4; x < b.right() + 4; ++x) {
      if (x < 0 || y < 0 || x >= img.width() || y >= img.height()) continue;
      const int dx = std::max(b.x - 1 - x, x - b.right());
      const int dy = std::max(b.y - 1 - y, y - b.bottom());
      if (std::max(dx, dy) >= 1) band.push_back(img.at(x, y));
    }
  }
  double bg = img.at(0, 0);
  if (!band.empty()) {
    std::nth_element(band.begin(), band.begin() + static_cast<std::ptrdiff_t>(band.size() / 2), band.end());
    bg = band[band.size() / 2];
  }

  const int inset = (b.w >= 14 && b.h >= 14) ? 4 : 2;
  Region interior, bottom, top, left, right;
  std::vector<double> ring, inner_ring;
  int far = 0, textured = 0, corner = 0, corner_bg = 0;
  for (int y = b.y; y < b.bottom(); ++y) {
    for (int x = b.x; x < b.right(); ++x) {
      const double v = img.at(x, y);
      if (std::fabs(v - bg) > 60) ++far;
      const int ox = x - b.x, oy = y - b.y;
      const int ex = b.right() - 1 - x, ey = b.bottom() - 1 - y;
      const int edge = std::min({ox, oy, ex, ey});
      if (std::max(std::min(ox, ex), std::min(oy, ey)) <= 3 && std::min(std::min(ox, ex), std::min(oy, ey)) >= 1) {
        ++corner;
        if (std::fabs(v - bg) <= 60) ++corner_bg;
      }
      if (edge >= 4 && edge <= 5) inner_ring.push_back(v);
      if (edge >= 1 && edge <= 2) {
        ring.push_back(v);
        const bool mid_column = ox >= 4 && ex >= 4;
        if (mid_column && ey >= 1 && ey <= 2) bottom.add(v);
        if (mid_column && oy >= 1 && oy <= 2) top.add(v);
      }
      if (edge >= inset) {
        interior.add(v);
        if (ox < b.w / 3) left.add(v);
        if (ex < b.w / 3) right.add(v);
        const double gx = static_cast<double>(img.at(x + 1, y)) - img.at(x - 1, y);
        const double gy = static_cast<double>(img.at(x, y + 1)) - img.at(x, y - 1);
        if (std::max(std::fabs(gx), std::fabs(gy)) > 12) ++textured;
      }
    }
  }
  f.fill_ratio = static_cast<double>(far) / b.area();
  f.corner_background = corner > 0 ? static_cast<double>(corner_bg) / corner : 0.0;
  f.interior_mean = interior.mean(bg);
  // Medians keep small bright details near the border from reading as a ring.
  auto median = [](std::vector<double>& v, double fallback) {
    if (v.empty()) return fallback;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
    return v[v.size() / 2];
  };
  const double outer = median(ring, f.interior_mean);
  f.ring_delta = median(inner_ring, outer) - outer;
  f.bottom_delta = top.mean(f.interior_mean) - bottom.mean(f.interior_mean);
  f.side_delta = right.mean(f.interior_mean) - left.mean(f.interior_mean);
  f.edge_density = interior.count > 0 ? static_cast<double>(textured) / interior.count : 0.0;
  return f;
}

// Rule table over size and patch measurements. Sizes are in pixels of the
// detected box; measurements are robust to a one-pixel box offset.
WidgetType classify_features(const PatchFeatures& f, const WidgetBox& box) {
  using WT = WidgetType;
  const int w = box.w, h = box.h;
  const bool ring = f.ring_delta > 10;
  if (f.width_fraction >= 0.85) {
    if (h <= 60 && f.interior_mean < 85) return WT::kToolbar;
    return WT::kListItem;
  }
  if (f.aspect >= 0.7 && f.aspect <= 1.45) {
    if (f.corner_background > 0.6 && w <= 30) return WT::kRadioButton;
    if (std::max(w, h) >= 46) return WT::kImageView;
    if (ring) return std::max(w, h) <= 28 ? WT::kCheckBox : WT::kImageButton;
    return WT::kIcon;
  }
  if (h <= 16) return WT::kProgressBar;
  if (ring && f.bottom_delta < 10) return f.side_delta > 6 ? WT::kSpinner : WT::kButton;
  if (f.bottom_delta >= 10) return WT::kEditText;
  if (f.edge_density < 0.01) return WT::kTextView;
  if (w <= 60 && f.aspect <= 2.8) return WT::kSwitch;
  if (f.aspect > 1.45) return WT::kSeekBar;
  return WT::kIcon;
}

WidgetType classify_widget_type(const Image& img, const WidgetBox& box) {
  return classify_features(measure_patch(img, box), box);
}

std::array<double, kWidgetTypeCount> one_hot(WidgetType t) {
  std::array<double, kWidgetTypeCount> out{};
  out[static_cast<std::size_t>(t)] = 1.0;
  return out;
}

WidgetDescriptor describe_widget(const Image& img, const WidgetBox& box, const EmbeddingConfig& cfg) {
  WidgetDescriptor d;
  d.box = box;
  d.image_vec = embed_widget_image(img, box, cfg.d_img);
  d.loc_vec = embed_widget_location(box, img.width(), img.height(), cfg.d_loc);
  d.type = classify_widget_type(img, box);
  d.type_onehot = one_hot(d.type);
  return d;
}

Vec widget_vector(const WidgetDescriptor& w) {
  Vec out;
  out.reserve(w.image_vec.size() + w.loc_vec.size() + w.type_onehot.size());
  out.insert(out.end(), w.image_vec.begin(), w.image_vec.end());
  out.insert(out.end(), w.loc_vec.begin(), w.loc_vec.end());
  out.insert(out.end(), w.type_onehot.begin(), w.type_onehot.end());
  return out;
}

PageState assemble_page(int width, int height, std::vector<WidgetDescriptor> widgets, const EmbeddingConfig& cfg,
                        const LayoutEncoder& encoder) {
  PageState p;
  p.width = width;
  p.height = height;
  p.widgets = std::move(widgets);
  const auto boxes = p.boxes();
  p.layout = characterize_layout(boxes, width, height, cfg.layout);
  p.layout_string = serialize_tree(p.layout);

  const std::size_t wd = static_cast<std::size_t>(cfg.widget_dim());
  Vec block(wd, 0.0);
  for (const auto& w : p.widgets) {
    const Vec v = widget_vector(w);
    if (v.size() != wd) throw Error(ErrorCode::kDimensionMismatch, "widget vector has the wrong dimension");
    for (std::size_t i = 0; i < wd; ++i) block[i] += v[i];
  }
  if (!p.widgets.empty()) {
    for (auto& x : block) x /= static_cast<double>(p.widgets.size());
  }
  const Vec lay = embed_layout(encoder, p.layout_string);
  p.state_vec = std::move(block);
  p.state_vec.insert(p.state_vec.end(), lay.begin(), lay.end());
  return p;
}

PageState page_state(const Image& img, const EmbeddingConfig& cfg, const LayoutEncoder& encoder) {
  const auto boxes = detect_widgets(img, cfg.vision);
  std::vector<WidgetDescriptor> widgets;
  widgets.reserve(boxes.size());
  for (const auto& b : boxes) widgets.push_back(describe_widget(img, b, cfg));
  return assemble_page(img.width(), img.height(), std::move(widgets), cfg, encoder);
}

double widget_similarity(const PageState& a, const PageState& b, double match_iou) {
  if (a.widgets.empty() && b.widgets.empty()) return 1.0;
  // Greedy matching breaks ties by index, so evaluate in a canonical order to
  // keep the measure symmetric.
  auto key = [](const PageState& s) {
    std::vector<int> coords;
    for (const auto& w : s.widgets) coords.insert(coords.end(), {w.box.x, w.box.y, w.box.w, w.box.h});
    return std::make_pair(s.state_vec, coords);
  };
  const bool swap = key(b) < key(a);
  const PageState& p = swap ? b : a;
  const PageState& q = swap ? a : b;
  const auto pairs = match_widgets(p.boxes(), q.boxes(), match_iou);
  if (pairs.empty()) return 0.0;
  double total = 0.0;
  for (const auto& [i, j] : pairs) {
    const Vec u = widget_vector(p.widgets[i]);
    const Vec v = widget_vector(q.widgets[j]);
    if (u.size() != v.size() || u.empty()) throw Error(ErrorCode::kDimensionMismatch, "widget vectors differ in size");
    double ss = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) ss += (u[k] - v[k]) * (u[k] - v[k]);
    total += std::min(1.0, std::sqrt(ss) / std::sqrt(static_cast<double>(u.size())));
  }
  return std::clamp(1.0 - total / static_cast<double>(pairs.size()), 0.0, 1.0);
}

double page_similarity(const PageState& a, const PageState& b, const EmbeddingConfig& cfg) {
  const double sw = widget_similarity(a, b, cfg.match_iou);
  const double sl = layout_similarity(a.layout_string, b.layout_string);
  return std::clamp(cfg.widget_weight * sw + cfg.layout_weight * sl, 0.0, 1.0);
}

bool same_page(const PageState& a, const PageState& b, const EmbeddingConfig& cfg) {
  return page_similarity(a, b, cfg) >= cfg.same_page_threshold;
}

}  // namespace pixplore
