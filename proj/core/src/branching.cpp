#include "typetree/branching.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "typetree/error.hpp"

namespace typetree {

using numerics::Mat;
using numerics::Vec;

BdParams BdParams::single_type(double birth, double death) {
  BdParams p;
  p.k = 1;
  p.b = {{birth}};
  p.d = {death};
  return p;
}

void BdParams::validate() const {
  if (k < 1) fail(ErrorKind::parameter, "k must be >= 1");
  if (static_cast<int>(b.size()) != k || static_cast<int>(d.size()) != k)
    fail(ErrorKind::parameter, "birth matrix and death vector must have k rows");
  for (int i = 0; i < k; ++i) {
    if (static_cast<int>(b[i].size()) != k) fail(ErrorKind::parameter, "birth matrix must be k x k");
    for (double x : b[i])
      if (!(x >= 0) || !std::isfinite(x)) fail(ErrorKind::parameter, "birth rates must be finite and >= 0");
    if (!(d[i] >= 0) || !std::isfinite(d[i])) fail(ErrorKind::parameter, "death rates must be finite and >= 0");
  }
}

double BdParams::total_birth(int i) const {
  double s = 0;
  for (double x : b[i]) s += x;
  return s;
}

namespace {

// Active lineages grouped by type; each entry is the id of the node the lineage hangs from.
struct Lineages {
  std::vector<std::vector<int>> by_type;
  long total = 0;

  explicit Lineages(int k) : by_type(k) {}
  void add(int type, int parent) {
    by_type[type].push_back(parent);
    ++total;
  }
  int take(int type, std::size_t idx) {
    auto& v = by_type[type];
    int p = v[idx];
    v[idx] = v.back();
    v.pop_back();
    --total;
    return p;
  }
  std::vector<long> counts() const {
    std::vector<long> c;
    for (const auto& v : by_type) c.push_back(static_cast<long>(v.size()));
    return c;
  }
};

int draw_weighted(const std::vector<double>& w, double total, Rng& rng) {
  double u = std::uniform_real_distribution<double>(0.0, total)(rng);
  int last = -1;
  for (int i = 0; i < static_cast<int>(w.size()); ++i) {
    if (w[i] <= 0) continue;
    last = i;
    if (u < w[i]) return i;
    u -= w[i];
  }
  return last;
}

}  // namespace

BdSimulation simulate_bd(const BdParams& bd, double T, int initial_type, Rng& rng, const BdOptions& opt) {
  bd.validate();
  if (!(T >= 0) || !std::isfinite(T)) fail(ErrorKind::parameter, "T must be finite and >= 0");
  if (initial_type < 1 || initial_type > bd.k) fail(ErrorKind::parameter, "initial type out of range");
  const int k = bd.k;
  BdSimulation out;
  out.tree = TypedTree(k, false);
  if (T == 0) {
    out.tree.add_node(initial_type, NodeKind::leaf, -1, 0.0);
    std::vector<long> c(k, 0);
    c[initial_type - 1] = 1;
    out.trajectory.push_back({0.0, c});
    return out;
  }
  std::vector<double> rate(k);
  for (int i = 0; i < k; ++i) rate[i] = bd.total_birth(i) + bd.d[i];

  TypedTree& tree = out.tree;
  int origin = tree.add_node(initial_type, NodeKind::root, -1, 0.0);
  Lineages lin(k);
  lin.add(initial_type - 1, origin);
  if (opt.record_trajectory) out.trajectory.push_back({0.0, lin.counts()});

  double t = 0;
  std::vector<double> w(k);
  for (;;) {
    double R = 0;
    for (int i = 0; i < k; ++i) R += (w[i] = rate[i] * static_cast<double>(lin.by_type[i].size()));
    if (R <= 0) break;
    t += std::exponential_distribution<double>(R)(rng);
    if (t >= T) break;
    int i = draw_weighted(w, R, rng);
    std::size_t idx = std::uniform_int_distribution<std::size_t>(0, lin.by_type[i].size() - 1)(rng);
    int parent = lin.take(i, idx);
    double u = std::uniform_real_distribution<double>(0.0, rate[i])(rng);
    if (u < bd.d[i]) {
      int v = tree.add_node(i + 1, NodeKind::leaf, parent, t);
      tree.nodes[v].extinct = true;
    } else {
      int j = draw_weighted(bd.b[i], bd.total_birth(i), rng);
      int v = tree.add_node(i + 1, NodeKind::binary, parent, t);
      lin.add(i, v);
      lin.add(j, v);
      if (lin.total > opt.max_lineages)
        fail(ErrorKind::resource, "population exceeded " + std::to_string(opt.max_lineages) + " lineages at t = " +
                                      std::to_string(t));
    }
    if (opt.record_trajectory) out.trajectory.push_back({t, lin.counts()});
  }
  for (int i = 0; i < k; ++i)
    for (int parent : lin.by_type[i]) tree.add_node(i + 1, NodeKind::leaf, parent, T);
  return out;
}

BdSimulation simulate_bd(const BdParams& bd, double T, int initial_type, std::uint64_t seed, const BdOptions& opt) {
  Rng rng = make_rng(seed);
  return simulate_bd(bd, T, initial_type, rng, opt);
}

TypedTree prune_to_ancestral(const TypedTree& full, double T) {
  TypedTree out(full.k, full.discrete);
  if (full.empty()) return out;
  const int n = full.size();
  auto ch = full.children();
  const double tol = 1e-9 * std::max(1.0, std::abs(T));

  // postorder survival flags
  std::vector<char> alive(n, 0);
  std::vector<int> order;
  order.reserve(n);
  std::vector<int> stack{full.root()};
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    order.push_back(v);
    for (int c : ch[v]) stack.push_back(c);
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const Node& nd = full.nodes[*it];
    if (nd.kind == NodeKind::leaf) {
      if (!nd.extinct && !full.discrete && std::abs(nd.time - T) > tol)
        fail(ErrorKind::structural, "surviving leaf " + std::to_string(nd.id) + " is not at the horizon");
      alive[*it] = !nd.extinct;
    } else {
      for (int c : ch[*it]) alive[*it] |= alive[c];
    }
  }
  if (!alive[full.root()]) return out;

  // (input node, output parent)
  std::vector<std::pair<int, int>> work{{full.root(), -1}};
  while (!work.empty()) {
    auto [v, p] = work.back();
    work.pop_back();
    const Node& nd = full.nodes[v];
    std::vector<int> live;
    for (int c : ch[v])
      if (alive[c]) live.push_back(c);
    auto copy = [&](NodeKind kind) {
      int id = out.add_node(nd.type, kind, p, nd.time);
      out.nodes[id].label = nd.label;
      return id;
    };
    if (nd.kind == NodeKind::leaf) {
      copy(NodeKind::leaf);
    } else if (live.size() == 2) {
      int id = copy(NodeKind::binary);
      work.push_back({live[1], id});
      work.push_back({live[0], id});
    } else if (nd.kind == NodeKind::root || nd.kind == NodeKind::unary) {
      work.push_back({live[0], copy(nd.kind)});
    } else if (full.nodes[live[0]].type != nd.type) {
      // only the offspring survived and it carries a new type
      work.push_back({live[0], copy(NodeKind::unary)});
    } else {
      work.push_back({live[0], p});
    }
  }
  return out;
}

double extinction_single_type(double b, double d, double s) {
  if (s <= 0) return 0.0;
  if (std::abs(b - d) < 1e-12) return b * s / (1 + b * s);
  double e = std::exp(-(b - d) * s);
  return d * (1 - e) / (b - d * e);
}

Vec ExtinctionTable::at(double t) const {
  Vec p = solution(T - t);
  return p.cwiseMax(0.0).cwiseMin(1.0);
}

ExtinctionTable extinction_probabilities(const BdParams& bd, double T, const ExtinctionOptions& opt) {
  bd.validate();
  if (!(T >= 0) || !std::isfinite(T)) fail(ErrorKind::parameter, "T must be finite and >= 0");
  if (opt.grid_points < 2) fail(ErrorKind::parameter, "need at least two grid points");
  const int k = bd.k;
  ExtinctionTable tab;
  tab.k = k;
  tab.T = T;
  Vec B(k);
  for (int i = 0; i < k; ++i) B(i) = bd.total_birth(i);
  Mat b(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) b(i, j) = bd.b[i][j];
  // in s = T - t the terminal condition becomes p(0) = 0
  auto f = [&](double, const Vec& p, Vec& dp) {
    Vec bp = b * p;
    for (int i = 0; i < k; ++i) dp(i) = bd.d[i] - (B(i) + bd.d[i]) * p(i) + p(i) * bp(i);
  };
  const int M = opt.grid_points;
  for (int m = 0; m < M; ++m) tab.times.push_back(T * m / (M - 1));
  tab.times.back() = T;
  if (T == 0) {
    tab.solution.t = {0.0};
    tab.solution.y = {Vec::Zero(k)};
    Vec d0(k);
    f(0, Vec::Zero(k), d0);
    tab.solution.dy = {d0};
  } else {
    numerics::OdeOptions o;
    o.rtol = opt.rtol;
    o.atol = opt.atol;
    for (double t : tab.times) o.stops.push_back(T - t);
    tab.solution = numerics::integrate_ode(f, Vec::Zero(k), 0.0, T, o);
  }
  tab.p.assign(k, std::vector<double>(M));
  for (int m = 0; m < M; ++m) {
    Vec p = tab.solution(T - tab.times[m]);
    for (int i = 0; i < k; ++i) {
      if (p(i) < -1e-9 || p(i) > 1 + 1e-9)
        fail(ErrorKind::numerical, "extinction probability left [0,1] by more than 1e-9: " + std::to_string(p(i)));
      tab.p[i][m] = std::clamp(p(i), 0.0, 1.0);
    }
  }
  // p(T,T) is exactly zero
  for (int i = 0; i < k; ++i) tab.p[i][M - 1] = 0.0;

  // integral-form residual of the dense solution over each grid interval
  for (int m = 0; m + 1 < M && T > 0; ++m) {
    double s0 = T - tab.times[m + 1], s1 = T - tab.times[m];
    auto g = [&](double s) -> Mat {
      Vec dp(k);
      f(s, tab.solution(s), dp);
      return dp;
    };
    Mat integral = numerics::integrate(g, s0, s1, 1e-11, 1e-14);
    Vec r = tab.solution(s1) - tab.solution(s0) - Vec(integral);
    tab.max_residual = std::max(tab.max_residual, r.cwiseAbs().maxCoeff());
  }
  return tab;
}

AncestralRates ancestral_rates(const BdParams& bd, const ExtinctionTable& table, double t) {
  if (table.k != bd.k) fail(ErrorKind::parameter, "extinction table has a different number of types");
  if (t < -1e-12 || t > table.T + 1e-12) fail(ErrorKind::parameter, "time outside [0, T]");
  const int k = bd.k;
  Vec p = table.at(std::clamp(t, 0.0, table.T));
  for (int i = 0; i < k; ++i)
    if (p(i) >= 1.0 - 1e-12)
      fail(ErrorKind::model, "type " + std::to_string(i + 1) + " is extinct with probability 1 at t = " +
                                 std::to_string(t) + "; surviving-lineage rates undefined");
  AncestralRates r;
  r.t = t;
  r.birth = Mat::Zero(k, k);
  r.mutation = Mat::Zero(k, k);
  r.total = Vec::Zero(k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      r.birth(i, j) = bd.b[i][j] * (1 - p(j));
      if (j != i) r.mutation(i, j) = bd.b[i][j] * (1 - p(j)) * p(i) / (1 - p(i));
      r.total(i) += r.birth(i, j) + r.mutation(i, j);
    }
  double sum = r.total.sum();
  r.weight = sum > 0 ? Vec(r.total / sum) : Vec::Zero(k);
  r.split_birth = Mat::Zero(k, k);
  r.split_mutation = Mat::Zero(k, k);
  for (int i = 0; i < k; ++i)
    if (r.total(i) > 0) {
      r.split_birth.row(i) = r.birth.row(i) / r.total(i);
      r.split_mutation.row(i) = r.mutation.row(i) / r.total(i);
    }
  return r;
}

TypedTree simulate_reconstructed(const BdParams& bd, const ExtinctionTable& table, int initial_type, Rng& rng,
                                 long max_lineages) {
  bd.validate();
  if (table.k != bd.k) fail(ErrorKind::parameter, "extinction table has a different number of types");
  if (initial_type < 1 || initial_type > bd.k) fail(ErrorKind::parameter, "initial type out of range");
  const int k = bd.k;
  const double T = table.T;
  TypedTree tree(k, false);
  if (T == 0) {
    tree.add_node(initial_type, NodeKind::leaf, -1, 0.0);
    return tree;
  }
  // per-type bound on the total event rate, from a fine scan with a safety factor
  Vec bound = Vec::Zero(k);
  const int scan = 4 * static_cast<int>(table.times.size());
  for (int m = 0; m <= scan; ++m) {
    auto r = ancestral_rates(bd, table, T * m / scan);
    bound = bound.cwiseMax(r.total);
  }
  bound = bound * 1.25 + Vec::Constant(k, 1e-12);

  int origin = tree.add_node(initial_type, NodeKind::root, -1, 0.0);
  Lineages lin(k);
  lin.add(initial_type - 1, origin);
  double t = 0;
  std::vector<double> w(k);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (;;) {
    double R = 0;
    for (int i = 0; i < k; ++i) R += (w[i] = bound(i) * static_cast<double>(lin.by_type[i].size()));
    if (R <= 0) break;
    t += std::exponential_distribution<double>(R)(rng);
    if (t >= T) break;
    int i = draw_weighted(w, R, rng);
    auto rates = ancestral_rates(bd, table, t);
    if (rates.total(i) > bound(i))
      fail(ErrorKind::numerical, "thinning bound exceeded for type " + std::to_string(i + 1));
    double u = unif(rng) * bound(i);
    if (u >= rates.total(i)) continue;  // rejected candidate
    std::size_t idx = std::uniform_int_distribution<std::size_t>(0, lin.by_type[i].size() - 1)(rng);
    int parent = lin.take(i, idx);
    // u is uniform on [0, q_i(t)); reuse it to pick the event
    int event = -1;
    bool is_birth = true;
    for (int j = 0; j < k && event < 0; ++j) {
      if (u < rates.birth(i, j)) event = j;
      else u -= rates.birth(i, j);
    }
    for (int j = 0; j < k && event < 0; ++j) {
      if (u < rates.mutation(i, j)) {
        event = j;
        is_birth = false;
      } else {
        u -= rates.mutation(i, j);
      }
    }
    if (event < 0) {  // rounding at the top end
      for (int j = k - 1; j >= 0 && event < 0; --j)
        if (rates.mutation(i, j) > 0) event = j, is_birth = false;
      for (int j = k - 1; j >= 0 && event < 0; --j)
        if (rates.birth(i, j) > 0) event = j;
    }
    if (is_birth) {
      int v = tree.add_node(i + 1, NodeKind::binary, parent, t);
      lin.add(i, v);
      lin.add(event, v);
    } else {
      int v = tree.add_node(i + 1, NodeKind::unary, parent, t);
      lin.add(event, v);
    }
    if (lin.total > max_lineages)
      fail(ErrorKind::resource, "reconstructed tree exceeded " + std::to_string(max_lineages) + " lineages");
  }
  for (int i = 0; i < k; ++i)
    for (int parent : lin.by_type[i]) tree.add_node(i + 1, NodeKind::leaf, parent, T);
  return tree;
}

TypedTree simulate_reconstructed(const BdParams& bd, double T, int initial_type, std::uint64_t seed) {
  auto table = extinction_probabilities(bd, T);
  Rng rng = make_rng(seed);
  return simulate_reconstructed(bd, table, initial_type, rng);
}

}  // namespace typetree
