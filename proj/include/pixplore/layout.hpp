#pragma once

#include <span>
#include <string>
#include <vector>

#include "pixplore/vision.hpp"

namespace pixplore {

// Node of the page hierarchy. Labels: 'R' page root, 'G' group, 'L' line,
// 'C' column (one per widget, `widget` indexes the page's widget list).
struct LayoutNode {
  char label = 'R';
  int widget = -1;
  std::vector<LayoutNode> children;

  std::size_t size() const;  // nodes in this subtree, including itself
  bool operator==(const LayoutNode&) const = default;
};

struct LayoutTree {
  LayoutNode root;

  std::size_t leaf_count() const;
  std::size_t depth() const;  // root counts as level 1
  bool operator==(const LayoutTree&) const = default;
};

// Brace-string serialization over {G, L, C, '{', '}'}.
struct LayoutString {
  std::string text;
  bool operator==(const LayoutString&) const = default;
};

struct LayoutConfig {
  double gap_threshold = 0.05;  // fraction of screen height
  double line_overlap = 0.5;    // fraction of the smaller height
};

LayoutTree characterize_layout(std::span<const WidgetBox> boxes, int screen_width, int screen_height,
                               const LayoutConfig& cfg = {});

LayoutString serialize_tree(const LayoutTree& tree);

// Parses any brace string over {G, L, C} into a forest hung under an 'R'
// root. Throws kMalformedLayout on bad characters or unbalanced braces.
LayoutTree parse_layout(const LayoutString& s);

// True when the tree has the root/Group/Line/Column shape.
bool is_hierarchy(const LayoutTree& tree);

// Real (non-root) node count.
std::size_t node_count(const LayoutTree& tree);

// Unit-cost ordered tree edit distance (Zhang-Shasha) between the two
// forests, each wrapped in a virtual root.
int tree_edit_distance(const LayoutTree& a, const LayoutTree& b);
int tree_edit_distance(const LayoutString& a, const LayoutString& b);

// 1 - d / max(n_a, n_b), clamped to [0, 1]; two empty layouts score 1.
double layout_similarity(const LayoutTree& a, const LayoutTree& b);
double layout_similarity(const LayoutString& a, const LayoutString& b);

}  // namespace pixplore
