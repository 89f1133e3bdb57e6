#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "../support/ted_oracle.hpp"
#include "pixplore/error.hpp"
#include "pixplore/layout.hpp"
#include "pixplore/rng.hpp"

using namespace pixplore;

namespace {

LayoutString ls(const std::string& s) { return LayoutString{s}; }

std::string random_forest(Rng& rng, int nodes) {
  oracle::Forest f;
  std::vector<oracle::Forest*> lists{&f};
  for (int i = 0; i < nodes; ++i) {
    auto* list = lists[rng.index(lists.size())];
    list->push_back(oracle::Node{"GLC"[rng.index(3)], {}});
    // pointers into vectors are invalidated by growth; rebuild them
    lists.clear();
    auto collect = [&](auto&& self, oracle::Forest& l) -> void {
      lists.push_back(&l);
      for (auto& x : l) self(self, x.kids);
    };
    collect(collect, f);
  }
  return oracle::to_string(f);
}

}  // namespace

TEST_CASE("characterize_layout on the documented shapes") {
  CHECK(serialize_tree(characterize_layout({}, 320, 640)).text.empty());

  std::vector<WidgetBox> one{{10, 10, 50, 20}};
  const auto t1 = characterize_layout(one, 320, 640);
  CHECK(serialize_tree(t1).text == "G{L{C}}");
  CHECK(t1.leaf_count() == 1);
  CHECK(t1.depth() == 4);

  std::vector<WidgetBox> two{{10, 10, 50, 20}, {10, 300, 50, 20}};
  CHECK(serialize_tree(characterize_layout(two, 320, 640)).text == "G{L{C}}G{L{C}}");
}

TEST_CASE("boxes sharing a row form one line ordered by x") {
  std::vector<WidgetBox> row{{200, 10, 40, 20}, {10, 12, 40, 20}, {100, 8, 40, 24}};
  const auto t = characterize_layout(row, 320, 640);
  CHECK(serialize_tree(t).text == "G{L{CCC}}");
  const auto& cols = t.root.children[0].children[0].children;
  CHECK(cols[0].widget == 1);
  CHECK(cols[1].widget == 2);
  CHECK(cols[2].widget == 0);
}

TEST_CASE("overlap below half the smaller height starts a new line") {
  // 20 px boxes overlapping by 9 px: under 50 %, gap none so same group
  std::vector<WidgetBox> boxes{{10, 100, 40, 20}, {100, 111, 40, 20}};
  CHECK(serialize_tree(characterize_layout(boxes, 320, 640)).text == "G{L{C}L{C}}");
  boxes[1].y = 110;  // exactly 50 %
  CHECK(serialize_tree(characterize_layout(boxes, 320, 640)).text == "G{L{CC}}");
}

TEST_CASE("characterize_layout is permutation invariant") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<WidgetBox> boxes;
    const int n = rng.range(1, 12);
    for (int i = 0; i < n; ++i) {
      boxes.push_back(WidgetBox{rng.range(0, 200), rng.range(0, 500), rng.range(8, 100), rng.range(8, 60)});
    }
    const auto ref = characterize_layout(boxes, 320, 640);
    CHECK(is_hierarchy(ref));
    CHECK(ref.leaf_count() == boxes.size());
    for (int k = 0; k < 3; ++k) {
      std::vector<int> perm(boxes.size());
      for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
      rng.shuffle(perm);
      std::vector<WidgetBox> shuffled;
      for (int p : perm) shuffled.push_back(boxes[static_cast<std::size_t>(p)]);
      auto t = characterize_layout(shuffled, 320, 640);
      // leaves refer to positions in the shuffled list; map back
      auto remap = [&](auto&& self, LayoutNode& node) -> void {
        if (node.widget >= 0) node.widget = perm[static_cast<std::size_t>(node.widget)];
        for (auto& c : node.children) self(self, c);
      };
      remap(remap, t.root);
      CHECK(t == ref);
    }
  }
}

TEST_CASE("serialize and parse round trip") {
  Rng rng(3);
  for (int i = 0; i < 300; ++i) {
    const std::string s = random_forest(rng, rng.range(0, 12));
    const auto tree = parse_layout(ls(s));
    CHECK(serialize_tree(tree).text == s);
    CHECK(node_count(tree) == oracle::count(oracle::parse(s)));
  }
}

TEST_CASE("malformed strings are rejected") {
  for (const char* bad : {"G{", "G}", "X", "G{L{C}", "{C}", "G{L{C}}}"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_layout(ls(bad)), Error);
    CHECK_THROWS_AS(tree_edit_distance(ls(bad), ls("G")), Error);
  }
}

TEST_CASE("tree edit distance hand cases") {
  CHECK(tree_edit_distance(ls("G{L{C}}"), ls("G{L{C}}")) == 0);
  CHECK(tree_edit_distance(ls("G{L{C}}"), ls("G{L{CC}}")) == 1);
  CHECK(tree_edit_distance(ls("G{L{C}}"), ls("")) == 3);
  CHECK(tree_edit_distance(ls(""), ls("")) == 0);
  CHECK(tree_edit_distance(ls("G"), ls("L")) == 1);
}

TEST_CASE("tree edit distance agrees with brute force on every forest of up to three nodes") {
  std::vector<std::string> all;
  for (std::size_t n = 0; n <= 3; ++n) {
    const auto f = oracle::forests_of_size(n);
    all.insert(all.end(), f.begin(), f.end());
  }
  for (const auto& a : all) {
    const auto dist = oracle::distances_from(a, 3);
    for (const auto& b : all) {
      // the cap max(n_a, n_b) never exceeds 3 here, and a larger cap can
      // only shorten paths, so the 3-node search must already be exact
      REQUIRE(tree_edit_distance(ls(a), ls(b)) == dist.at(b));
    }
  }
}

TEST_CASE("layout similarity") {
  CHECK(layout_similarity(ls("G{L{CC}}"), ls("G{L{CC}}")) == 1.0);
  CHECK(layout_similarity(ls("G{L{C}}"), ls("")) == 0.0);
  CHECK(layout_similarity(ls("G{L{C}}"), ls("G{L{CC}}")) == doctest::Approx(0.75));
  CHECK(layout_similarity(ls(""), ls("")) == 1.0);
  Rng rng(5);
  for (int i = 0; i < 500; ++i) {
    const auto a = ls(random_forest(rng, rng.range(0, 10)));
    const auto b = ls(random_forest(rng, rng.range(0, 10)));
    const double s = layout_similarity(a, b);
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
    CHECK(s == layout_similarity(b, a));
  }
}

TEST_CASE("tree edit distance is a metric") {
  Rng rng(9);
  for (int i = 0; i < 300; ++i) {
    const auto a = ls(random_forest(rng, rng.range(0, 9)));
    const auto b = ls(random_forest(rng, rng.range(0, 9)));
    const auto c = ls(random_forest(rng, rng.range(0, 9)));
    const int ab = tree_edit_distance(a, b);
    CHECK(tree_edit_distance(a, a) == 0);
    CHECK(ab == tree_edit_distance(b, a));
    CHECK(tree_edit_distance(a, c) <= ab + tree_edit_distance(b, c));
  }
}
