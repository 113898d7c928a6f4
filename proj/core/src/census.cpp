#include "typetree/census.hpp"

#include <numeric>
#include <sstream>

#include "typetree/error.hpp"

namespace typetree {

Census Census::zero(int k, Ordering ordering) {
  Census c;
  c.k = k;
  c.ordering = ordering;
  auto order = IndexOrder::make(k, ordering);
  c.leaf_counts.assign(k, 0);
  c.cherry_counts.assign(order.num_cherries(), 0);
  c.pendant_counts.assign(order.num_pendants(), 0);
  return c;
}

long long Census::total_leaves() const { return std::accumulate(leaf_counts.begin(), leaf_counts.end(), 0LL); }
long long Census::total_cherries() const {
  return std::accumulate(cherry_counts.begin(), cherry_counts.end(), 0LL);
}
long long Census::total_pendants() const {
  return std::accumulate(pendant_counts.begin(), pendant_counts.end(), 0LL);
}

Census Census::reindexed(Ordering target) const {
  if (target == ordering) return *this;
  auto from = IndexOrder::make(k, ordering);
  auto to = IndexOrder::make(k, target);
  Census out = zero(k, target);
  out.leaf_counts = leaf_counts;
  for (int i = 0; i < from.num_cherries(); ++i) {
    auto [l, a, b] = from.cherry_at(i);
    out.cherry_counts[to.cherry_index(l, a, b)] = cherry_counts[i];
  }
  for (int i = 0; i < from.num_pendants(); ++i) {
    auto [l, m] = from.pendant_at(i);
    out.pendant_counts[to.pendant_index(l, m)] = pendant_counts[i];
  }
  return out;
}

Census census(const TypedTree& tree) {
  tree.validate();
  Census c = Census::zero(tree.k);
  if (tree.empty()) return c;
  auto order = IndexOrder::generic(tree.k);
  TypedTree t = contract_unary(tree);
  auto ch = t.children();
  for (const auto& n : t.nodes) {
    if (n.kind == NodeKind::leaf) {
      ++c.leaf_counts[n.type - 1];
      continue;
    }
    if (n.kind != NodeKind::binary) continue;
    const Node& x = t.nodes[ch[n.id][0]];
    const Node& y = t.nodes[ch[n.id][1]];
    bool xl = x.kind == NodeKind::leaf, yl = y.kind == NodeKind::leaf;
    if (xl && yl)
      ++c.cherry_counts[order.cherry_index(n.type - 1, x.type - 1, y.type - 1)];
    else if (xl)
      ++c.pendant_counts[order.pendant_index(n.type - 1, x.type - 1)];
    else if (yl)
      ++c.pendant_counts[order.pendant_index(n.type - 1, y.type - 1)];
  }
  return c;
}

std::string census_csv_header(int k) {
  auto order = IndexOrder::generic(k);
  std::ostringstream os;
  os << "k";
  for (int i = 1; i <= k; ++i) os << ",N_" << i;
  for (int i = 0; i < order.num_cherries(); ++i) {
    auto [l, a, b] = order.cherry_at(i);
    os << ",C_" << l + 1 << "_" << a + 1 << "_" << b + 1;
  }
  for (int i = 0; i < order.num_pendants(); ++i) {
    auto [l, m] = order.pendant_at(i);
    os << ",L_" << l + 1 << "_" << m + 1;
  }
  return os.str();
}

std::string census_csv_row(const Census& in) {
  Census c = in.reindexed(Ordering::generic_lex);
  std::ostringstream os;
  os << c.k;
  for (auto v : c.leaf_counts) os << ',' << v;
  for (auto v : c.cherry_counts) os << ',' << v;
  for (auto v : c.pendant_counts) os << ',' << v;
  return os.str();
}

namespace {
std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  return out;
}
}  // namespace

Census parse_census_csv(const std::string& text) {
  std::istringstream is(text);
  std::string header, row;
  int lineno = 0;
  while (std::getline(is, header) && ++lineno && header.find_first_not_of(" \r\t") == std::string::npos) {
  }
  if (!std::getline(is, row)) throw ParseError("census CSV needs a header and a data row", lineno + 1, 1);
  ++lineno;
  auto cells = split_csv(row);
  if (cells.empty()) throw ParseError("empty census row", lineno, 1);
  int k = 0;
  try {
    k = std::stoi(cells[0]);
  } catch (...) {
    throw ParseError("first column must be k", lineno, 1);
  }
  if (k < 1) throw ParseError("k must be >= 1", lineno, 1);
  if (split_csv(header) != split_csv(census_csv_header(k)))
    throw ParseError("header does not match the census layout for k=" + std::to_string(k), lineno - 1, 1);
  Census c = Census::zero(k);
  size_t expect = 1 + c.leaf_counts.size() + c.cherry_counts.size() + c.pendant_counts.size();
  if (cells.size() != expect)
    throw ParseError("expected " + std::to_string(expect) + " columns, got " + std::to_string(cells.size()), lineno,
                     1);
  size_t pos = 1;
  auto take = [&](std::vector<long long>& v) {
    for (auto& x : v) {
      try {
        x = std::stoll(cells[pos]);
      } catch (...) {
        throw ParseError("non-integer count in column " + std::to_string(pos + 1), lineno, 1);
      }
      if (x < 0) throw ParseError("negative count", lineno, 1);
      ++pos;
    }
  };
  take(c.leaf_counts);
  take(c.cherry_counts);
  take(c.pendant_counts);
  return c;
}

}  // namespace typetree
