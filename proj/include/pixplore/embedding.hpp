#pragma once

#include <array>
#include <vector>

#include "pixplore/image.hpp"
#include "pixplore/layout.hpp"
#include "pixplore/layout_encoder.hpp"
#include "pixplore/vision.hpp"
#include "pixplore/widget_types.hpp"

namespace pixplore {

using Vec = std::vector<double>;

struct EmbeddingConfig {
  int d_img = 64;  // perfect squares
  int d_loc = 64;
  VisionConfig vision;
  LayoutConfig layout;
  double match_iou = 0.8;
  double widget_weight = 0.5;
  double layout_weight = 0.5;
  double same_page_threshold = 0.75;

  int widget_dim() const { return d_img + d_loc + kWidgetTypeCount; }
};

struct WidgetDescriptor {
  WidgetBox box;
  Vec image_vec;
  Vec loc_vec;
  std::array<double, kWidgetTypeCount> type_onehot{};
  WidgetType type = WidgetType::kIcon;
};

struct PageState {
  int width = 0;
  int height = 0;
  std::vector<WidgetDescriptor> widgets;
  LayoutTree layout;
  LayoutString layout_string;
  Vec state_vec;

  std::vector<WidgetBox> boxes() const;
};

// Patch crop resampled bilinearly to sqrt(d) x sqrt(d), scaled to [0, 1].
Vec embed_widget_image(const Image& img, const WidgetBox& box, int d_img);

// Box mask average-pooled to sqrt(d) x sqrt(d) cells (row-major coverage).
Vec embed_widget_location(const WidgetBox& box, int screen_width, int screen_height, int d_loc);

// Measurements the type rules look at.
struct PatchFeatures {
  double aspect = 1.0;        // w / h
  double width_fraction = 0;  // w / screen width
  double fill_ratio = 0;      // pixels far from the surrounding background
  double corner_background = 0;  // background share of the four corner patches
  double ring_delta = 0;      // inner-band median minus border-band median
  double edge_density = 0;    // interior pixels with a visible local gradient
  double interior_mean = 0;
  double bottom_delta = 0;    // interior mean minus bottom-band mean
  double side_delta = 0;      // right-third mean minus left-third mean
};
PatchFeatures measure_patch(const Image& img, const WidgetBox& box);

WidgetType classify_features(const PatchFeatures& f, const WidgetBox& box);
WidgetType classify_widget_type(const Image& img, const WidgetBox& box);
std::array<double, kWidgetTypeCount> one_hot(WidgetType t);

WidgetDescriptor describe_widget(const Image& img, const WidgetBox& box, const EmbeddingConfig& cfg);

// concat(image_vec, loc_vec, type_onehot).
Vec widget_vector(const WidgetDescriptor& w);

PageState page_state(const Image& img, const EmbeddingConfig& cfg, const LayoutEncoder& encoder);

// Assembles a page from already-described widgets (used by tests and by
// page_state itself).
PageState assemble_page(int width, int height, std::vector<WidgetDescriptor> widgets, const EmbeddingConfig& cfg,
                        const LayoutEncoder& encoder);

double widget_similarity(const PageState& a, const PageState& b, double match_iou = 0.8);
double page_similarity(const PageState& a, const PageState& b, const EmbeddingConfig& cfg = {});
bool same_page(const PageState& a, const PageState& b, const EmbeddingConfig& cfg = {});

}  // namespace pixplore
