#pragma once

#include <array>
#include <vector>

namespace typetree {

enum class Ordering { generic_lex, paper_k2 };

/// Position of the unordered pair {j1,j2} (0-based types) in lexicographic order of j1<=j2.
int pair_index(int k, int j1, int j2);
/// Inverse of pair_index.
std::array<int, 2> pair_at(int k, int pos);
inline int num_pairs(int k) { return k * (k + 1) / 2; }

/// Maps cherry types (l, j1<=j2) and pendant types (l, m) to vector positions.
/// All types here are 0-based.
class IndexOrder {
 public:
  static IndexOrder generic(int k);
  /// The 10-vector layout (C1^11, C1^12, C1^22, C2^22, C2^12, C2^11, L1^1, L1^2, L2^2, L2^1).
  static IndexOrder paper_k2();
  static IndexOrder make(int k, Ordering ordering);

  int k() const { return k_; }
  Ordering ordering() const { return ordering_; }
  int num_cherries() const { return static_cast<int>(cherries_.size()); }
  int num_pendants() const { return static_cast<int>(pendants_.size()); }

  int cherry_index(int l, int j1, int j2) const;
  int pendant_index(int l, int m) const;
  std::array<int, 3> cherry_at(int pos) const { return cherries_.at(pos); }
  std::array<int, 2> pendant_at(int pos) const { return pendants_.at(pos); }

 private:
  IndexOrder(int k, Ordering ordering);
  int k_;
  Ordering ordering_;
  std::vector<std::array<int, 3>> cherries_;
  std::vector<std::array<int, 2>> pendants_;
  std::vector<int> cherry_pos_;   // generic position -> this order
  std::vector<int> pendant_pos_;
};

const char* to_string(Ordering o);

/// paper_k2 for k = 2, generic_lex otherwise.
inline Ordering default_ordering(int k) { return k == 2 ? Ordering::paper_k2 : Ordering::generic_lex; }

}  // namespace typetree
