#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <opencv2/imgproc.hpp>

#include "pixplore/error.hpp"
#include "pixplore/harness.hpp"
#include "pixplore/rng.hpp"
#include "pixplore/vision.hpp"

using namespace pixplore;

namespace {

Image rectangle_image() {
  Image img(64, 64, 0);
  img.fill_rect(22, 22, 20, 20, 255);
  return img;
}

// Reference pipeline: OpenCV blur with the same kernel, then its Canny on
// the L2 gradient magnitude.
cv::Mat reference_edges(const Image& img, double low, double high) {
  cv::Mat src(img.height(), img.width(), CV_8UC1, const_cast<std::uint8_t*>(img.pixels().data()));
  cv::Mat blurred, edges;
  cv::GaussianBlur(src, blurred, cv::Size(5, 5), 1.4, 1.4, cv::BORDER_REPLICATE);
  cv::Canny(blurred, edges, low, high, 3, true);
  return edges;
}

// Share of `a`'s edge pixels with a `b` edge pixel within `radius`.
double near_fraction(const EdgeMap& a, const cv::Mat& b, int radius, bool a_is_ours) {
  long total = 0, near = 0;
  for (int y = 0; y < a.height; ++y) {
    for (int x = 0; x < a.width; ++x) {
      const bool on = a_is_ours ? a.at(x, y) : b.at<std::uint8_t>(y, x) != 0;
      if (!on) continue;
      ++total;
      bool hit = false;
      for (int dy = -radius; dy <= radius && !hit; ++dy) {
        for (int dx = -radius; dx <= radius && !hit; ++dx) {
          const int xx = x + dx, yy = y + dy;
          if (xx < 0 || yy < 0 || xx >= a.width || yy >= a.height) continue;
          hit = a_is_ours ? b.at<std::uint8_t>(yy, xx) != 0 : a.at(xx, yy);
        }
      }
      near += hit;
    }
  }
  return total ? static_cast<double>(near) / static_cast<double>(total) : 1.0;
}

}  // namespace

TEST_CASE("uniform image has no edges") {
  CHECK(canny_edges(Image(32, 32, 128), 50, 150).count() == 0);
}

TEST_CASE("tiny images and bad thresholds are rejected") {
  CHECK_THROWS_AS(canny_edges(Image(2, 10, 0), 50, 150), Error);
  CHECK_THROWS_AS(canny_edges(Image(10, 10, 0), 150, 50), Error);
  CHECK_THROWS_AS(canny_edges(Image(10, 10, 0), -1, 50), Error);
}

TEST_CASE("rectangle contour stays on the border") {
  const EdgeMap e = canny_edges(rectangle_image(), 50, 150);
  REQUIRE(e.count() > 0);
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) {
      if (!e.at(x, y)) continue;
      // distance to the rectangle outline [22, 41]
      const int dx = std::min(std::abs(x - 22), std::abs(x - 41));
      const int dy = std::min(std::abs(y - 22), std::abs(y - 41));
      const bool in_x = x >= 20 && x <= 43, in_y = y >= 20 && y <= 43;
      const int d = (in_x && in_y) ? std::min(dx, dy) : 99;
      CHECK(d <= 2);
    }
  }
  // every border pixel has an edge within one pixel
  for (int t = 22; t <= 41; ++t) {
    for (auto [x, y] : {std::pair{t, 22}, std::pair{t, 41}, std::pair{22, t}, std::pair{41, t}}) {
      bool hit = false;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) hit = hit || e.at(x + dx, y + dy);
      }
      CHECK(hit);
    }
  }
}

TEST_CASE("vertical step gives a narrow band at the step") {
  Image img(40, 30, 0);
  img.fill_rect(20, 0, 20, 30, 255);
  const EdgeMap e = canny_edges(img, 50, 150);
  int lo = 99, hi = -1;
  for (int y = 0; y < 30; ++y) {
    for (int x = 0; x < 40; ++x) {
      if (e.at(x, y)) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      }
    }
  }
  REQUIRE(hi >= 0);
  CHECK(hi - lo + 1 <= 2);
  CHECK(lo >= 19);
  CHECK(hi <= 20);
}

TEST_CASE("edges agree with the OpenCV reference") {
  std::vector<Image> images{rectangle_image()};
  for (auto& s : simulated_vision_corpus(1, 10)) images.push_back(s.image);
  for (const auto& img : images) {
    const EdgeMap ours = canny_edges(img, 50, 150);
    const cv::Mat ref = reference_edges(img, 50, 150);
    CHECK(near_fraction(ours, ref, 1, true) >= 0.95);
    CHECK(near_fraction(ours, ref, 1, false) >= 0.95);
  }
}

TEST_CASE("box extraction") {
  const EdgeMap empty{640, 640, std::vector<std::uint8_t>(640 * 640, 0)};
  CHECK(extract_widget_boxes(empty, 0.0005, 4).empty());

  EdgeMap speck = empty;
  for (int y = 100; y < 102; ++y) {
    for (int x = 100; x < 102; ++x) speck.bits[static_cast<std::size_t>(y) * 640 + x] = 1;
  }
  CHECK(extract_widget_boxes(speck, 0.0, 4).empty());

  const auto boxes = extract_widget_boxes(canny_edges(rectangle_image(), 50, 150), 0.0005, 4);
  REQUIRE(boxes.size() == 1);
  CHECK(iou(boxes[0], WidgetBox{22, 22, 20, 20}) >= 0.8);
  CHECK_THROWS_AS(extract_widget_boxes(empty, 1.5, 4), Error);
}

TEST_CASE("extracted boxes respect the noise filters") {
  for (const auto& s : simulated_vision_corpus(30, 10)) {
    const auto e = canny_edges(s.image, 50, 150);
    const double frac = 0.002;
    const auto boxes = extract_widget_boxes(e, frac, 6);
    const double min_area = frac * s.image.width() * s.image.height();
    for (const auto& b : boxes) {
      CHECK(b.w >= 6);
      CHECK(b.h >= 6);
      CHECK(static_cast<double>(b.area()) >= min_area);
    }
    CHECK(std::is_sorted(boxes.begin(), boxes.end(),
                         [](const WidgetBox& a, const WidgetBox& b) { return std::pair(a.y, a.x) < std::pair(b.y, b.x); }));
  }
}

TEST_CASE("iou") {
  const WidgetBox a{0, 0, 10, 10};
  CHECK(iou(a, a) == 1.0);
  CHECK(iou(a, WidgetBox{20, 20, 5, 5}) == 0.0);
  CHECK(iou(a, WidgetBox{5, 0, 10, 10}) == doctest::Approx(1.0 / 3.0));
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const WidgetBox p{rng.range(0, 50), rng.range(0, 50), rng.range(1, 40), rng.range(1, 40)};
    const WidgetBox q{rng.range(0, 50), rng.range(0, 50), rng.range(1, 40), rng.range(1, 40)};
    CHECK(iou(p, q) == iou(q, p));
    CHECK(iou(p, p) == 1.0);
  }
}

TEST_CASE("greedy matching") {
  CHECK(match_widgets({}, {{0, 0, 5, 5}}).empty());
  const std::vector<WidgetBox> list{{0, 0, 10, 10}, {30, 30, 10, 10}, {60, 0, 20, 10}};
  const auto same = match_widgets(list, list);
  REQUIRE(same.size() == 3);
  for (const auto& [i, j] : same) CHECK(i == j);

  const auto m = match_widgets({{0, 0, 10, 10}}, {{1, 0, 10, 10}, {0, 0, 10, 10}});
  REQUIRE(m.size() == 1);
  CHECK(m[0] == std::pair{0, 1});

  Rng rng(4);
  for (int t = 0; t < 200; ++t) {
    std::vector<WidgetBox> a, b;
    for (int i = 0; i < 8; ++i) a.push_back({rng.range(0, 30), rng.range(0, 30), rng.range(5, 20), rng.range(5, 20)});
    for (int i = 0; i < 8; ++i) b.push_back({rng.range(0, 30), rng.range(0, 30), rng.range(5, 20), rng.range(5, 20)});
    const auto pairs = match_widgets(a, b, 0.3);
    std::set<int> ua, ub;
    for (const auto& [i, j] : pairs) {
      CHECK(ua.insert(i).second);
      CHECK(ub.insert(j).second);
      CHECK(iou(a[static_cast<std::size_t>(i)], b[static_cast<std::size_t>(j)]) > 0.3);
    }
  }
}

TEST_CASE("luma conversion") {
  const std::vector<std::uint8_t> rgb{255, 0, 0, 0, 255, 0, 0, 0, 255, 255, 255, 255};
  const Image img = from_rgb(2, 2, rgb);
  CHECK(img.at(0, 0) == 76);
  CHECK(img.at(1, 0) == 150);
  CHECK(img.at(0, 1) == 29);
  CHECK(img.at(1, 1) == 255);
}
