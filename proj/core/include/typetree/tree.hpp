#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace typetree {

/// Shared generator type; streams are derived with make_rng(seed, stream).
using Rng = std::mt19937_64;
Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

/// leaf: no children; binary: two; unary: one (type change);
/// root: parentless origin with a single stem child (time trees).
/// A parentless binary or leaf node is also a valid root.
enum class NodeKind { leaf, binary, unary, root };

struct Node {
  int id = 0;
  int type = 1;  // 1..k
  NodeKind kind = NodeKind::leaf;
  int parent = -1;
  double time = 0.0;     // meaningful only when the tree is not discrete
  bool extinct = false;  // death mark, full birth-death trees only
  std::string label;
};

/// Flat node array with parent links. Children are derived on demand,
/// in increasing id order.
class TypedTree {
 public:
  TypedTree() = default;
  TypedTree(int k, bool discrete) : k(k), discrete(discrete) {}

  int k = 1;
  bool discrete = true;
  std::vector<Node> nodes;

  int add_node(int type, NodeKind kind, int parent, double time = 0.0);

  bool empty() const { return nodes.empty(); }
  int size() const { return static_cast<int>(nodes.size()); }
  int root() const;
  std::vector<std::vector<int>> children() const;
  int num_leaves() const;
  int count_kind(NodeKind kind) const;
  /// Leaves that are alive (not extinct).
  int num_extant() const;
  std::vector<long long> leaf_type_counts() const;

  /// Throws a structural error when the tree violates its invariants.
  void validate() const;
};

/// Relabel ids in depth-first preorder (children visited in id order).
TypedTree normalize(const TypedTree& t);

/// Remove every unary node; each maximal chain becomes a single edge.
TypedTree contract_unary(const TypedTree& t);

/// Structural equality after normalization; times compared within tol.
bool same_tree(const TypedTree& a, const TypedTree& b, double time_tol = 1e-9);

/// Number of lineages present at time t (edges crossing t) in a timed tree.
int lineages_at(const TypedTree& t, double time);

const char* to_string(NodeKind kind);

}  // namespace typetree
