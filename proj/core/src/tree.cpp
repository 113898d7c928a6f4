#include "typetree/tree.hpp"

#include <cmath>
#include <functional>

#include "typetree/error.hpp"

namespace typetree {

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x9e3779b9u};
  return Rng(seq);
}

int TypedTree::add_node(int type, NodeKind kind, int parent, double time) {
  Node n;
  n.id = size();
  n.type = type;
  n.kind = kind;
  n.parent = parent;
  n.time = time;
  nodes.push_back(std::move(n));
  return nodes.back().id;
}

int TypedTree::root() const {
  int r = -1;
  for (const auto& n : nodes)
    if (n.parent < 0) {
      if (r >= 0) fail(ErrorKind::structural, "tree has more than one root");
      r = n.id;
    }
  if (r < 0) fail(ErrorKind::structural, "tree has no root");
  return r;
}

std::vector<std::vector<int>> TypedTree::children() const {
  std::vector<std::vector<int>> ch(nodes.size());
  for (const auto& n : nodes)
    if (n.parent >= 0) {
      if (n.parent >= size()) fail(ErrorKind::structural, "parent id out of range");
      ch[n.parent].push_back(n.id);
    }
  return ch;
}

int TypedTree::num_leaves() const { return count_kind(NodeKind::leaf); }

int TypedTree::count_kind(NodeKind kind) const {
  int c = 0;
  for (const auto& n : nodes) c += n.kind == kind;
  return c;
}

int TypedTree::num_extant() const {
  int c = 0;
  for (const auto& n : nodes) c += n.kind == NodeKind::leaf && !n.extinct;
  return c;
}

std::vector<long long> TypedTree::leaf_type_counts() const {
  std::vector<long long> c(k, 0);
  for (const auto& n : nodes)
    if (n.kind == NodeKind::leaf && !n.extinct) ++c[n.type - 1];
  return c;
}

void TypedTree::validate() const {
  if (k < 1) fail(ErrorKind::structural, "k must be >= 1");
  if (nodes.empty()) return;
  for (size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].id != static_cast<int>(i)) fail(ErrorKind::structural, "node ids must be 0..n-1");
  int r = root();
  auto ch = children();
  for (const auto& n : nodes) {
    if (n.type < 1 || n.type > k)
      fail(ErrorKind::structural, "node " + std::to_string(n.id) + " has type outside 1..k");
    size_t want = 0;
    switch (n.kind) {
      case NodeKind::leaf: want = 0; break;
      case NodeKind::binary: want = 2; break;
      case NodeKind::unary: want = 1; break;
      case NodeKind::root:
        want = 1;
        if (n.parent >= 0) fail(ErrorKind::structural, "root-kind node has a parent");
        break;
    }
    if (ch[n.id].size() != want)
      fail(ErrorKind::structural, "node " + std::to_string(n.id) + " (" + to_string(n.kind) + ") has " +
                                      std::to_string(ch[n.id].size()) + " children");
    if (!discrete && n.parent >= 0 && n.time < nodes[n.parent].time - 1e-12)
      fail(ErrorKind::structural, "child time precedes parent time at node " + std::to_string(n.id));
  }
  // reachability from the root rules out cycles
  std::vector<char> seen(nodes.size(), 0);
  std::vector<int> stack{r};
  size_t visited = 0;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    if (seen[v]) fail(ErrorKind::structural, "cycle detected");
    seen[v] = 1;
    ++visited;
    for (int c : ch[v]) stack.push_back(c);
  }
  if (visited != nodes.size()) fail(ErrorKind::structural, "tree is disconnected or cyclic");
}

TypedTree normalize(const TypedTree& t) {
  TypedTree out(t.k, t.discrete);
  if (t.empty()) return out;
  auto ch = t.children();
  std::vector<std::pair<int, int>> stack{{t.root(), -1}};
  while (!stack.empty()) {
    auto [v, p] = stack.back();
    stack.pop_back();
    Node n = t.nodes[v];
    n.id = out.size();
    n.parent = p;
    out.nodes.push_back(n);
    for (auto it = ch[v].rbegin(); it != ch[v].rend(); ++it) stack.push_back({*it, n.id});
  }
  return out;
}

TypedTree contract_unary(const TypedTree& t) {
  TypedTree out(t.k, t.discrete);
  if (t.empty()) return out;
  auto ch = t.children();
  // (old node, new parent)
  std::vector<std::pair<int, int>> stack{{t.root(), -1}};
  while (!stack.empty()) {
    auto [v, p] = stack.back();
    stack.pop_back();
    const Node& n = t.nodes[v];
    if (n.kind == NodeKind::unary) {
      stack.push_back({ch[v][0], p});
      continue;
    }
    int id = out.add_node(n.type, n.kind, p, n.time);
    out.nodes[id].extinct = n.extinct;
    out.nodes[id].label = n.label;
    for (auto it = ch[v].rbegin(); it != ch[v].rend(); ++it) stack.push_back({*it, id});
  }
  return out;
}

bool same_tree(const TypedTree& a, const TypedTree& b, double time_tol) {
  if (a.k != b.k || a.discrete != b.discrete || a.size() != b.size()) return false;
  TypedTree x = normalize(a), y = normalize(b);
  for (int i = 0; i < x.size(); ++i) {
    const Node &u = x.nodes[i], &v = y.nodes[i];
    if (u.type != v.type || u.kind != v.kind || u.parent != v.parent || u.extinct != v.extinct ||
        u.label != v.label)
      return false;
    if (!x.discrete && std::abs(u.time - v.time) > time_tol) return false;
  }
  return true;
}

int lineages_at(const TypedTree& t, double time) {
  int c = 0;
  for (const auto& n : t.nodes) {
    if (n.parent < 0) continue;
    if (t.nodes[n.parent].time <= time && time < n.time) ++c;
    // a lineage ending exactly at an extant leaf still counts at that instant
    else if (n.kind == NodeKind::leaf && !n.extinct && n.time == time && t.nodes[n.parent].time <= time) ++c;
  }
  return c;
}

const char* to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::leaf: return "leaf";
    case NodeKind::binary: return "binary";
    case NodeKind::unary: return "unary";
    case NodeKind::root: return "root";
  }
  return "?";
}

}  // namespace typetree
