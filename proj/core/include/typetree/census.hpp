#pragma once

#include <string>
#include <vector>

#include "typetree/index_order.hpp"
#include "typetree/tree.hpp"

namespace typetree {

/// Leaf, cherry and pendant counts of a tree in a fixed index order.
struct Census {
  int k = 1;
  Ordering ordering = Ordering::generic_lex;
  std::vector<long long> leaf_counts;
  std::vector<long long> cherry_counts;
  std::vector<long long> pendant_counts;

  static Census zero(int k, Ordering ordering = Ordering::generic_lex);
  long long total_leaves() const;
  long long total_cherries() const;
  long long total_pendants() const;
  Census reindexed(Ordering target) const;
  bool operator==(const Census&) const = default;
};

/// Cherries and pendants are classified on the binary skeleton (unary nodes contracted).
Census census(const TypedTree& tree);

std::string census_csv_header(int k);
std::string census_csv_row(const Census& c);
/// Parses "header\nrow" as written by the two functions above (generic order).
Census parse_census_csv(const std::string& text);

}  // namespace typetree
