#include "pixplore/layout.hpp"

#include <algorithm>
#include <numeric>
#include <tuple>

#include "pixplore/error.hpp"

namespace pixplore {

std::size_t LayoutNode::size() const {
  std::size_t n = 1;
  for (const auto& c : children) n += c.size();
  return n;
}

std::size_t LayoutTree::leaf_count() const {
  std::size_t n = 0;
  auto walk = [&](auto&& self, const LayoutNode& node) -> void {
    if (node.children.empty() && node.label != 'R') ++n;
    for (const auto& c : node.children) self(self, c);
  };
  walk(walk, root);
  return n;
}

std::size_t LayoutTree::depth() const {
  auto walk = [](auto&& self, const LayoutNode& node) -> std::size_t {
    std::size_t d = 0;
    for (const auto& c : node.children) d = std::max(d, self(self, c));
    return d + 1;
  };
  return walk(walk, root);
}

LayoutTree characterize_layout(std::span<const WidgetBox> boxes, int /*screen_width*/, int screen_height,
                               const LayoutConfig& cfg) {
  LayoutTree tree;
  if (boxes.empty()) return tree;

  std::vector<int> order(boxes.size());
  std::iota(order.begin(), order.end(), 0);
  auto key = [&](int i) { return std::tie(boxes[i].y, boxes[i].x, boxes[i].h, boxes[i].w); };
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return key(a) < key(b); });

  const double max_gap = cfg.gap_threshold * screen_height;
  std::vector<std::vector<int>> groups;
  int group_bottom = 0;
  for (int idx : order) {
    const WidgetBox& b = boxes[idx];
    if (groups.empty() || static_cast<double>(b.y - group_bottom) > max_gap) {
      groups.emplace_back();
      group_bottom = b.bottom();
    }
    groups.back().push_back(idx);
    group_bottom = std::max(group_bottom, b.bottom());
  }

  for (const auto& members : groups) {
    // Each line is anchored by its first (topmost) member.
    std::vector<std::vector<int>> lines;
    for (int idx : members) {
      const WidgetBox& b = boxes[idx];
      bool placed = false;
      for (auto& line : lines) {
        const WidgetBox& anchor = boxes[line.front()];
        const int overlap = std::min(anchor.bottom(), b.bottom()) - std::max(anchor.y, b.y);
        if (overlap > 0 && overlap >= cfg.line_overlap * std::min(anchor.h, b.h)) {
          line.push_back(idx);
          placed = true;
          break;
        }
      }
      if (!placed) lines.push_back({idx});
    }
    LayoutNode group{'G', -1, {}};
    for (auto& line : lines) {
      std::stable_sort(line.begin(), line.end(), [&](int a, int b) {
        return std::tie(boxes[a].x, boxes[a].y, boxes[a].w, boxes[a].h) <
               std::tie(boxes[b].x, boxes[b].y, boxes[b].w, boxes[b].h);
      });
      LayoutNode line_node{'L', -1, {}};
      for (int idx : line) line_node.children.push_back(LayoutNode{'C', idx, {}});
      group.children.push_back(std::move(line_node));
    }
    tree.root.children.push_back(std::move(group));
  }
  return tree;
}

namespace {

void emit(const LayoutNode& node, std::string& out) {
  out.push_back(node.label);
  if (!node.children.empty()) {
    out.push_back('{');
    for (const auto& c : node.children) emit(c, out);
    out.push_back('}');
  }
}

}  // namespace

LayoutString serialize_tree(const LayoutTree& tree) {
  LayoutString s;
  for (const auto& c : tree.root.children) emit(c, s.text);
  return s;
}

LayoutTree parse_layout(const LayoutString& s) {
  LayoutTree tree;
  std::vector<LayoutNode*> stack{&tree.root};
  bool can_open = false;
  for (std::size_t i = 0; i < s.text.size(); ++i) {
    const char c = s.text[i];
    if (c == 'G' || c == 'L' || c == 'C') {
      stack.back()->children.push_back(LayoutNode{c, -1, {}});
      can_open = true;
    } else if (c == '{') {
      if (!can_open) throw Error(ErrorCode::kMalformedLayout, "'{' without a preceding node at " + std::to_string(i));
      stack.push_back(&stack.back()->children.back());
      can_open = false;
    } else if (c == '}') {
      if (stack.size() < 2) throw Error(ErrorCode::kMalformedLayout, "unbalanced '}' at " + std::to_string(i));
      stack.pop_back();
      can_open = false;
    } else {
      throw Error(ErrorCode::kMalformedLayout, std::string("unexpected character '") + c + "'");
    }
  }
  if (stack.size() != 1) throw Error(ErrorCode::kMalformedLayout, "unclosed '{'");
  return tree;
}

bool is_hierarchy(const LayoutTree& tree) {
  for (const auto& g : tree.root.children) {
    if (g.label != 'G' || g.children.empty()) return false;
    for (const auto& l : g.children) {
      if (l.label != 'L' || l.children.empty()) return false;
      for (const auto& c : l.children) {
        if (c.label != 'C' || !c.children.empty()) return false;
      }
    }
  }
  return true;
}

std::size_t node_count(const LayoutTree& tree) { return tree.root.size() - 1; }

namespace {

// Postorder view used by Zhang-Shasha.
struct Postorder {
  std::vector<char> label;
  std::vector<int> leftmost;  // postorder index of the leftmost leaf descendant
  std::vector<int> keyroots;
};

int build(const LayoutNode& node, Postorder& po) {
  int first_leaf = -1;
  for (const auto& c : node.children) {
    const int leaf = build(c, po);
    if (first_leaf < 0) first_leaf = leaf;
  }
  const int idx = static_cast<int>(po.label.size());
  po.label.push_back(node.label);
  po.leftmost.push_back(first_leaf < 0 ? idx : first_leaf);
  return po.leftmost.back();
}

Postorder postorder(const LayoutNode& root) {
  Postorder po;
  build(root, po);
  const int n = static_cast<int>(po.label.size());
  // Keyroots: for each distinct leftmost leaf, the highest node having it.
  std::vector<int> highest(n, -1);
  for (int i = 0; i < n; ++i) highest[po.leftmost[i]] = i;
  for (int i = 0; i < n; ++i) {
    if (highest[i] >= 0) po.keyroots.push_back(highest[i]);
  }
  std::sort(po.keyroots.begin(), po.keyroots.end());
  return po;
}

}  // namespace

int tree_edit_distance(const LayoutTree& a, const LayoutTree& b) {
  const Postorder pa = postorder(a.root);
  const Postorder pb = postorder(b.root);
  const int na = static_cast<int>(pa.label.size());
  const int nb = static_cast<int>(pb.label.size());

  std::vector<int> treedist(static_cast<std::size_t>(na) * nb, 0);
  std::vector<int> fd(static_cast<std::size_t>(na + 1) * (nb + 1), 0);
  auto td = [&](int i, int j) -> int& { return treedist[static_cast<std::size_t>(i) * nb + j]; };

  for (int ki : pa.keyroots) {
    for (int kj : pb.keyroots) {
      const int li = pa.leftmost[ki];
      const int lj = pb.leftmost[kj];
      const int rows = ki - li + 2;
      const int cols = kj - lj + 2;
      auto f = [&](int r, int c) -> int& { return fd[static_cast<std::size_t>(r) * cols + c]; };
      f(0, 0) = 0;
      for (int r = 1; r < rows; ++r) f(r, 0) = f(r - 1, 0) + 1;
      for (int c = 1; c < cols; ++c) f(0, c) = f(0, c - 1) + 1;
      for (int r = 1; r < rows; ++r) {
        const int i = li + r - 1;
        for (int c = 1; c < cols; ++c) {
          const int j = lj + c - 1;
          const int del = f(r - 1, c) + 1;
          const int ins = f(r, c - 1) + 1;
          if (pa.leftmost[i] == li && pb.leftmost[j] == lj) {
            const int ren = f(r - 1, c - 1) + (pa.label[i] == pb.label[j] ? 0 : 1);
            f(r, c) = std::min({del, ins, ren});
            td(i, j) = f(r, c);
          } else {
            const int pr = pa.leftmost[i] - li;
            const int pc = pb.leftmost[j] - lj;
            f(r, c) = std::min({del, ins, f(pr, pc) + td(i, j)});
          }
        }
      }
    }
  }
  return td(na - 1, nb - 1);
}

int tree_edit_distance(const LayoutString& a, const LayoutString& b) {
  return tree_edit_distance(parse_layout(a), parse_layout(b));
}

double layout_similarity(const LayoutTree& a, const LayoutTree& b) {
  const std::size_t n = std::max(node_count(a), node_count(b));
  if (n == 0) return 1.0;
  const double sim = 1.0 - static_cast<double>(tree_edit_distance(a, b)) / static_cast<double>(n);
  return std::clamp(sim, 0.0, 1.0);
}

double layout_similarity(const LayoutString& a, const LayoutString& b) {
  return layout_similarity(parse_layout(a), parse_layout(b));
}

}  // namespace pixplore
