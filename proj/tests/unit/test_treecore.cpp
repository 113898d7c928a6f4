#include <doctest.h>

#include <set>

#include "typetree/branching.hpp"
#include "typetree/census.hpp"
#include "typetree/erm.hpp"
#include "typetree/error.hpp"
#include "typetree/index_order.hpp"
#include "typetree/newick.hpp"
#include "typetree/tree.hpp"

using namespace typetree;

TEST_CASE("pair_index is a bijection onto 0..m-1") {
  for (int k = 1; k <= 5; ++k) {
    std::set<int> seen;
    for (int a = 0; a < k; ++a)
      for (int b = a; b < k; ++b) {
        int p = pair_index(k, a, b);
        CHECK(p == pair_index(k, b, a));
        auto back = pair_at(k, p);
        CHECK(back[0] == a);
        CHECK(back[1] == b);
        seen.insert(p);
      }
    CHECK(static_cast<int>(seen.size()) == num_pairs(k));
    CHECK(*seen.rbegin() == num_pairs(k) - 1);
  }
}

TEST_CASE("paper_k2 layout") {
  auto o = IndexOrder::paper_k2();
  const std::array<std::array<int, 3>, 6> cherries = {
      {{0, 0, 0}, {0, 0, 1}, {0, 1, 1}, {1, 1, 1}, {1, 0, 1}, {1, 0, 0}}};
  for (int i = 0; i < 6; ++i) {
    CHECK(o.cherry_at(i) == cherries[i]);
    CHECK(o.cherry_index(cherries[i][0], cherries[i][1], cherries[i][2]) == i);
  }
  const std::array<std::array<int, 2>, 4> pendants = {{{0, 0}, {0, 1}, {1, 1}, {1, 0}}};
  for (int i = 0; i < 4; ++i) {
    CHECK(o.pendant_at(i) == pendants[i]);
    CHECK(o.pendant_index(pendants[i][0], pendants[i][1]) == i);
  }
  auto g = IndexOrder::generic(2);
  CHECK(g.cherry_index(1, 0, 0) == 3);
  CHECK(g.pendant_index(1, 0) == 2);
}

TEST_CASE("rng streams are reproducible and distinct") {
  Rng a = make_rng(42, 3), b = make_rng(42, 3), c = make_rng(42, 4), d = make_rng(43, 3);
  auto x = a();
  CHECK(x == b());
  CHECK(x != c());
  CHECK(x != d());
}

namespace {
// ((1,2)2, 1)1 with an optional unary 1->1 above the type-1 leaf
TypedTree small_tree(bool with_unary) {
  TypedTree t(2, true);
  int root = t.add_node(1, NodeKind::binary, -1);
  int inner = t.add_node(2, NodeKind::binary, root);
  t.add_node(1, NodeKind::leaf, inner);
  t.add_node(2, NodeKind::leaf, inner);
  int attach = root;
  if (with_unary) attach = t.add_node(2, NodeKind::unary, root);
  t.add_node(1, NodeKind::leaf, attach);
  return t;
}
}  // namespace

TEST_CASE("census of a hand-built tree") {
  TypedTree t = small_tree(false);
  t.validate();
  Census c = census(t);
  CHECK(c.k == 2);
  CHECK(c.leaf_counts == std::vector<long long>{2, 1});
  auto g = IndexOrder::generic(2);
  std::vector<long long> cherries(6, 0), pendants(4, 0);
  cherries[g.cherry_index(1, 0, 1)] = 1;
  pendants[g.pendant_index(0, 0)] = 1;
  CHECK(c.cherry_counts == cherries);
  CHECK(c.pendant_counts == pendants);
  CHECK(c.total_cherries() == 1);
  CHECK(c.total_pendants() == 1);
}

TEST_CASE("census contracts unary nodes") {
  TypedTree t = small_tree(true);
  t.validate();
  CHECK(census(t) == census(small_tree(false)));
  TypedTree c = contract_unary(t);
  CHECK(c.count_kind(NodeKind::unary) == 0);
  CHECK(same_tree(c, small_tree(false)));
}

TEST_CASE("census reindexing roundtrip") {
  Census c = census(simulate_erm(ErmParams::k2({0.5, 0.3, 0.2}, {0.1, 0.4, 0.5}), 40, 1, 5));
  Census p = c.reindexed(Ordering::paper_k2);
  CHECK(p.ordering == Ordering::paper_k2);
  CHECK(p.total_cherries() == c.total_cherries());
  CHECK(p.reindexed(Ordering::generic_lex) == c);
}

TEST_CASE("census CSV roundtrip") {
  Census c = census(simulate_erm(ErmParams::k2({0.2, 0.3, 0.5}, {0.6, 0.2, 0.2}), 30, 2, 11));
  std::string text = census_csv_header(2) + "\n" + census_csv_row(c) + "\n";
  CHECK(parse_census_csv(text) == c);
  CHECK(census_csv_header(1) == "k,N_1,C_1_1_1,L_1_1");
  CHECK_THROWS_AS(parse_census_csv("k,N_1\n1,2\n"), ParseError);
}

TEST_CASE("validate rejects malformed trees") {
  TypedTree t(1, true);
  int r = t.add_node(1, NodeKind::binary, -1);
  t.add_node(1, NodeKind::leaf, r);
  CHECK_THROWS_AS(t.validate(), Error);
  TypedTree u(1, true);
  u.add_node(3, NodeKind::leaf, -1);
  CHECK_THROWS_AS(u.validate(), Error);
}

TEST_CASE("Newick roundtrip on discrete and timed trees") {
  TypedTree t = small_tree(true);
  std::string s = to_newick(t);
  TypedTree back = parse_newick(s, 2);
  CHECK(same_tree(back, t));
  CHECK(to_newick(back) == s);

  BdParams bd;
  bd.k = 2;
  bd.b = {{1.0, 0.4}, {0.3, 0.9}};
  bd.d = {0.5, 0.2};
  auto sim = simulate_bd(bd, 3.0, 1, 9);
  std::string fs = to_newick(sim.tree);
  TypedTree fb = parse_newick(fs, 2);
  CHECK(same_tree(fb, sim.tree, 1e-9));
  CHECK(fb.num_extant() == sim.tree.num_extant());
}

TEST_CASE("Newick parse errors carry a position") {
  CHECK_THROWS_AS(parse_newick("((a,b);"), ParseError);
  CHECK_THROWS_AS(parse_newick("([&type=x],b);"), ParseError);
  try {
    parse_newick("(,;");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.column() >= 1);
  }
}

TEST_CASE("normalize gives preorder ids") {
  TypedTree t = small_tree(false);
  TypedTree n = normalize(t);
  CHECK(n.root() == 0);
  for (const auto& nd : n.nodes)
    if (nd.parent >= 0) CHECK(nd.parent < nd.id);
}

TEST_CASE("lineages_at counts edges crossing a time") {
  TypedTree t(1, false);
  int o = t.add_node(1, NodeKind::root, -1, 0.0);
  int b = t.add_node(1, NodeKind::binary, o, 1.0);
  t.add_node(1, NodeKind::leaf, b, 3.0);
  int b2 = t.add_node(1, NodeKind::binary, b, 2.0);
  t.add_node(1, NodeKind::leaf, b2, 3.0);
  t.add_node(1, NodeKind::leaf, b2, 3.0);
  t.validate();
  CHECK(lineages_at(t, 0.5) == 1);
  CHECK(lineages_at(t, 1.5) == 2);
  CHECK(lineages_at(t, 2.5) == 3);
}
