#pragma once

// Brute-force ordered tree edit distance for the tests: breadth-first search
// over single-node edits (insert, delete, relabel) inside the space of
// {G, L, C} forests up to a node bound.  Any edit script can be reordered
// into deletions, relabels, insertions without changing its cost, so a
// search capped at max(n_a, n_b) nodes is exact for pairs inside the cap.

#include <cstddef>
#include <deque>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace oracle {

struct Node {
  char label = 'G';
  std::vector<Node> kids;
};
using Forest = std::vector<Node>;

inline std::size_t count(const Forest& f) {
  std::size_t n = 0;
  for (const auto& x : f) n += 1 + count(x.kids);
  return n;
}

inline void write(const Forest& f, std::string& out) {
  for (const auto& x : f) {
    out += x.label;
    if (!x.kids.empty()) {
      out += '{';
      write(x.kids, out);
      out += '}';
    }
  }
}

inline std::string to_string(const Forest& f) {
  std::string s;
  write(f, s);
  return s;
}

inline Forest parse(const std::string& s) {
  std::vector<Forest> stack(1);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c == 'G' || c == 'L' || c == 'C') {
      stack.back().push_back(Node{c, {}});
    } else if (c == '{') {
      if (stack.back().empty()) throw std::invalid_argument("brace without node");
      stack.emplace_back();
    } else if (c == '}') {
      if (stack.size() < 2) throw std::invalid_argument("unbalanced");
      Forest kids = std::move(stack.back());
      stack.pop_back();
      stack.back().back().kids = std::move(kids);
    } else {
      throw std::invalid_argument("bad character");
    }
  }
  if (stack.size() != 1) throw std::invalid_argument("unbalanced");
  return stack[0];
}

// Every forest reachable from `f` by one edit, capped at `max_nodes`.
inline void neighbours(const Forest& f, std::size_t max_nodes, std::vector<std::string>& out) {
  const std::size_t n = count(f);
  // Visit each sibling list; `edit` receives a mutable reference to it.
  auto lists = [&](auto&& self, Forest& list, auto&& edit) -> void {
    edit(list);
    for (auto& x : list) self(self, x.kids, edit);
  };
  Forest work = f;
  lists(lists, work, [&](Forest& list) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      const Node saved = list[i];
      // relabel
      for (char l : {'G', 'L', 'C'}) {
        if (l == saved.label) continue;
        list[i].label = l;
        out.push_back(to_string(work));
      }
      list[i].label = saved.label;
      // delete: children take the node's place
      Forest replaced(list.begin(), list.begin() + static_cast<long>(i));
      replaced.insert(replaced.end(), saved.kids.begin(), saved.kids.end());
      replaced.insert(replaced.end(), list.begin() + static_cast<long>(i) + 1, list.end());
      Forest original = list;
      list = std::move(replaced);
      out.push_back(to_string(work));
      list = std::move(original);
    }
    if (n >= max_nodes) return;
    // insert: a new node adopts the contiguous run [a, b)
    for (std::size_t a = 0; a <= list.size(); ++a) {
      for (std::size_t b = a; b <= list.size(); ++b) {
        for (char l : {'G', 'L', 'C'}) {
          Forest original = list;
          Node fresh{l, Forest(list.begin() + static_cast<long>(a), list.begin() + static_cast<long>(b))};
          Forest replaced(list.begin(), list.begin() + static_cast<long>(a));
          replaced.push_back(std::move(fresh));
          replaced.insert(replaced.end(), list.begin() + static_cast<long>(b), list.end());
          list = std::move(replaced);
          out.push_back(to_string(work));
          list = std::move(original);
        }
      }
    }
  });
}

// Distances from `source` to every forest with at most `max_nodes` nodes.
inline std::unordered_map<std::string, int> distances_from(const std::string& source, std::size_t max_nodes) {
  std::unordered_map<std::string, int> dist{{source, 0}};
  std::deque<std::string> queue{source};
  std::vector<std::string> next;
  while (!queue.empty()) {
    const std::string cur = std::move(queue.front());
    queue.pop_front();
    const int d = dist[cur];
    next.clear();
    neighbours(parse(cur), max_nodes, next);
    for (auto& s : next) {
      if (dist.emplace(s, d + 1).second) queue.push_back(std::move(s));
    }
  }
  return dist;
}

inline int distance(const std::string& a, const std::string& b) {
  const std::size_t cap = std::max(count(parse(a)), count(parse(b)));
  const auto dist = distances_from(a, cap);
  return dist.at(to_string(parse(b)));
}

// All labelled forests with exactly `n` nodes, as strings.
inline std::vector<std::string> forests_of_size(std::size_t n) {
  std::vector<std::vector<Forest>> by(n + 1);
  by[0] = {Forest{}};
  for (std::size_t k = 1; k <= n; ++k) {
    // first tree has 1 + c nodes (c in its subtree), the rest k - 1 - c
    for (std::size_t c = 0; c + 1 <= k; ++c) {
      for (const auto& kids : by[c]) {
        for (const auto& rest : by[k - 1 - c]) {
          for (char l : {'G', 'L', 'C'}) {
            Forest f{Node{l, kids}};
            f.insert(f.end(), rest.begin(), rest.end());
            by[k].push_back(std::move(f));
          }
        }
      }
    }
  }
  std::vector<std::string> out;
  for (const auto& f : by[n]) out.push_back(to_string(f));
  return out;
}

}  // namespace oracle
