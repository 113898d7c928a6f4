#include "typetree/erm.hpp"

#include <cmath>

#include "typetree/error.hpp"

namespace typetree {

ErmParams ErmParams::single_type() {
  ErmParams p;
  p.k = 1;
  p.q = {{1.0}};
  return p;
}

ErmParams ErmParams::k2(std::array<double, 3> q1, std::array<double, 3> q2) {
  ErmParams p;
  p.k = 2;
  p.q = {{q1[0], q1[1], q1[2]}, {q2[0], q2[1], q2[2]}};
  p.validate();
  return p;
}

void ErmParams::validate() const {
  if (k < 1) fail(ErrorKind::parameter, "k must be >= 1");
  if (static_cast<int>(q.size()) != k) fail(ErrorKind::parameter, "need one probability row per type");
  for (int i = 0; i < k; ++i) {
    if (static_cast<int>(q[i].size()) != num_pairs(k))
      fail(ErrorKind::parameter, "row " + std::to_string(i + 1) + " must have k(k+1)/2 entries");
    double s = 0;
    for (double x : q[i]) {
      if (!(x >= 0.0 && x <= 1.0)) fail(ErrorKind::parameter, "probabilities must lie in [0,1]");
      s += x;
    }
    if (std::abs(s - 1.0) > 1e-12)
      fail(ErrorKind::parameter, "row " + std::to_string(i + 1) + " sums to " + std::to_string(s) + ", not 1");
  }
}

bool ErmParams::has_absorbing_type() const {
  for (int i = 0; i < k; ++i)
    if (prob(i, i, i) == 1.0) return true;
  return false;
}

namespace {
void need_k2(const ErmParams& p) {
  if (p.k != 2) fail(ErrorKind::condition, "this quantity is defined for k = 2 only");
}
}  // namespace

double ErmParams::c1() const {
  need_k2(*this);
  return 2 * q[0][0] + q[0][1];
}
double ErmParams::c2() const {
  need_k2(*this);
  return 2 * q[1][0] + q[1][1];
}
double ErmParams::c1p() const {
  need_k2(*this);
  return 2 * q[1][2] + q[1][1];
}
double ErmParams::c2p() const {
  need_k2(*this);
  return 2 * q[0][2] + q[0][1];
}

namespace {

struct RowSampler {
  std::vector<std::vector<double>> cum;
  std::vector<std::array<int, 2>> pairs;

  explicit RowSampler(const ErmParams& p) {
    int m = num_pairs(p.k);
    for (int j = 0; j < m; ++j) pairs.push_back(pair_at(p.k, j));
    for (int i = 0; i < p.k; ++i) {
      std::vector<double> c(m);
      double s = 0;
      for (int j = 0; j < m; ++j) c[j] = (s += p.q[i][j]);
      c.back() = 2.0;  // guards against rounding at the top end
      cum.push_back(std::move(c));
    }
  }
  int draw(int type, Rng& rng) const {
    double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const auto& c = cum[type];
    int j = 0;
    while (u >= c[j]) ++j;
    return j;
  }
};

}  // namespace

TypedTree simulate_erm(const ErmParams& params, long n, int initial_type, Rng& rng) {
  params.validate();
  if (n < 1) fail(ErrorKind::parameter, "n must be >= 1");
  if (initial_type < 1 || initial_type > params.k) fail(ErrorKind::parameter, "initial type out of range");
  RowSampler sampler(params);
  TypedTree t(params.k, true);
  t.nodes.reserve(2 * n);
  t.add_node(initial_type, NodeKind::leaf, -1);
  std::vector<int> leaves{0};
  leaves.reserve(n);
  while (static_cast<long>(leaves.size()) < n) {
    std::size_t idx = std::uniform_int_distribution<std::size_t>(0, leaves.size() - 1)(rng);
    int v = leaves[idx];
    Node& node = t.nodes[v];
    node.kind = NodeKind::binary;
    auto [j1, j2] = sampler.pairs[sampler.draw(node.type - 1, rng)];
    int a = t.add_node(j1 + 1, NodeKind::leaf, v);
    int b = t.add_node(j2 + 1, NodeKind::leaf, v);
    leaves[idx] = a;
    leaves.push_back(b);
  }
  return t;
}

TypedTree simulate_erm(const ErmParams& params, long n, int initial_type, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  return simulate_erm(params, n, initial_type, rng);
}

Census simulate_erm_census(const ErmParams& params, long n, int initial_type, Rng& rng) {
  return census(simulate_erm(params, n, initial_type, rng));
}

}  // namespace typetree
