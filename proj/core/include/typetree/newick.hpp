#pragma once

#include <string>
#include <string_view>

#include "typetree/tree.hpp"

namespace typetree {

/// Annotated Newick: every node carries [&type=<int>] (plus extinct=1 for
/// death-marked leaves); branch lengths are written for timed trees.
std::string to_newick(const TypedTree& tree);

/// k = 0 infers k as the largest type seen. A parentless single-child clade
/// becomes a root-kind node, other single-child clades become unary nodes.
TypedTree parse_newick(std::string_view text, int k = 0);

}  // namespace typetree
