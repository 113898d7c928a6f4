#include "typetree/yule.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "typetree/error.hpp"
#include "typetree/index_order.hpp"

namespace typetree {

using numerics::Mat;
using numerics::Vec;

double YuleRates::birth_total(int i) const {
  double s = 0;
  for (double x : birth[i]) s += x;
  return s;
}

double YuleRates::mutation_total(int i) const {
  double s = 0;
  for (int j = 0; j < static_cast<int>(mutation[i].size()); ++j)
    if (j != i) s += mutation[i][j];
  return s;
}

YuleParams YuleParams::constant(int k, YuleRates rates) {
  YuleParams p;
  p.k = k;
  p.segments = {std::move(rates)};
  p.validate();
  return p;
}

YuleParams YuleParams::single_type(double r) { return constant(1, {{{r}}, {{0.0}}}); }

YuleParams YuleParams::cladogenetic(double r, double p) {
  double a = r * (1 - p) * (1 - p), b = r * 2 * p * (1 - p), c = r * p * p;
  return constant(2, {{{a, b, c}, {c, b, a}}, {{0, 0}, {0, 0}}});
}

YuleParams YuleParams::anagenetic(double r, double p) {
  return constant(2, {{{r, 0, 0}, {0, 0, r}}, {{0, r * p}, {r * p, 0}}});
}

YuleParams YuleParams::asymmetric_cladogenetic(double r, double p) {
  double a = r * (1 - p) * (1 - p), b = r * 2 * p * (1 - p), c = r * p * p;
  return constant(2, {{{r, 0, 0}, {c, b, a}}, {{0, 0}, {0, 0}}});
}

YuleParams YuleParams::asymmetric_anagenetic(double r, double p) {
  return constant(2, {{{r, 0, 0}, {0, 0, r}}, {{0, 0}, {r * p, 0}}});
}

void YuleParams::validate() const {
  if (k < 1) fail(ErrorKind::parameter, "k must be >= 1");
  if (segments.empty()) fail(ErrorKind::parameter, "rate schedule has no segments");
  if (breakpoints.size() + 1 != segments.size())
    fail(ErrorKind::parameter, "need one more rate segment than breakpoints");
  for (size_t i = 0; i < breakpoints.size(); ++i) {
    if (!std::isfinite(breakpoints[i]) || breakpoints[i] <= 0)
      fail(ErrorKind::parameter, "breakpoints must be finite and positive");
    if (i > 0 && breakpoints[i] <= breakpoints[i - 1])
      fail(ErrorKind::parameter, "breakpoints must be strictly increasing");
  }
  const int m = num_pairs(k);
  for (const auto& s : segments) {
    if (static_cast<int>(s.birth.size()) != k || static_cast<int>(s.mutation.size()) != k)
      fail(ErrorKind::parameter, "rate tables must have k rows");
    for (int i = 0; i < k; ++i) {
      if (static_cast<int>(s.birth[i].size()) != m)
        fail(ErrorKind::parameter, "birth rates need k(k+1)/2 entries per type");
      if (static_cast<int>(s.mutation[i].size()) != k) fail(ErrorKind::parameter, "mutation rates must be k x k");
      for (double x : s.birth[i])
        if (!(x >= 0) || !std::isfinite(x)) fail(ErrorKind::parameter, "birth rates must be finite and >= 0");
      for (double x : s.mutation[i])
        if (!(x >= 0) || !std::isfinite(x)) fail(ErrorKind::parameter, "mutation rates must be finite and >= 0");
    }
  }
}

int YuleParams::segment_at(double t) const {
  int s = 0;
  while (s < static_cast<int>(breakpoints.size()) && t >= breakpoints[s]) ++s;
  return s;
}

namespace {

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
};

}  // namespace

TypedTree simulate_yule(const YuleParams& yp, const YuleStop& stop, int initial_type, Rng& rng, long max_lineages) {
  yp.validate();
  if (!stop.time && !stop.leaves) fail(ErrorKind::parameter, "need a stopping time or a leaf count");
  if (stop.time && (!(*stop.time >= 0) || !std::isfinite(*stop.time)))
    fail(ErrorKind::parameter, "stopping time must be finite and >= 0");
  if (stop.leaves && *stop.leaves < 1) fail(ErrorKind::parameter, "leaf count must be >= 1");
  if (initial_type < 1 || initial_type > yp.k) fail(ErrorKind::parameter, "initial type out of range");
  const int k = yp.k, m = num_pairs(k);
  const double T = stop.time.value_or(std::numeric_limits<double>::infinity());
  const long N = stop.leaves.value_or(std::numeric_limits<long>::max());

  TypedTree tree(k, false);
  if (T == 0 || N == 1) {
    tree.add_node(initial_type, NodeKind::leaf, -1, 0.0);
    return tree;
  }
  int origin = tree.add_node(initial_type, NodeKind::root, -1, 0.0);
  Lineages lin(k);
  lin.add(initial_type - 1, origin);
  double t = 0;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> w(k);
  bool final_checked = false;
  for (;;) {
    int seg = yp.segment_at(t);
    const YuleRates& r = yp.segments[seg];
    double seg_end = seg < static_cast<int>(yp.breakpoints.size()) ? yp.breakpoints[seg]
                                                                    : std::numeric_limits<double>::infinity();
    if (std::isinf(T) && std::isinf(seg_end) && !final_checked) {
      // a leaf target needs some type reachable by mutation that can give birth
      std::vector<char> seen(k, 0);
      std::vector<int> todo;
      for (int i = 0; i < k; ++i)
        if (!lin.by_type[i].empty()) seen[i] = 1, todo.push_back(i);
      bool branching = false;
      while (!todo.empty() && !branching) {
        int i = todo.back();
        todo.pop_back();
        branching = r.birth_total(i) > 0;
        for (int j = 0; j < k; ++j)
          if (j != i && !seen[j] && r.mutation[i][j] > 0) seen[j] = 1, todo.push_back(j);
      }
      if (!branching) fail(ErrorKind::condition, "leaf target is unreachable: no reachable type gives birth");
      final_checked = true;
    }
    double R = 0;
    for (int i = 0; i < k; ++i) R += (w[i] = r.total(i) * static_cast<double>(lin.by_type[i].size()));
    double dt = R > 0 ? std::exponential_distribution<double>(R)(rng) : std::numeric_limits<double>::infinity();
    if (t + dt >= std::min(seg_end, T)) {
      if (seg_end < T) {  // memoryless: restart in the next segment
        t = seg_end;
        continue;
      }
      if (std::isinf(T)) fail(ErrorKind::condition, "leaf target is unreachable: all rates vanish");
      t = T;
      break;
    }
    t += dt;
    double u = unif(rng) * R;
    int i = 0;
    for (; i < k - 1; ++i) {
      if (u < w[i]) break;
      u -= w[i];
    }
    while (lin.by_type[i].empty()) --i;  // rounding guard
    std::size_t idx = std::uniform_int_distribution<std::size_t>(0, lin.by_type[i].size() - 1)(rng);
    int parent = lin.take(i, idx);
    double e = unif(rng) * r.total(i);
    int pick = -1;
    bool birth = true;
    for (int c = 0; c < m && pick < 0; ++c) {
      if (e < r.birth[i][c]) pick = c;
      else e -= r.birth[i][c];
    }
    for (int j = 0; j < k && pick < 0; ++j) {
      if (j == i) continue;
      if (e < r.mutation[i][j]) {
        pick = j;
        birth = false;
      } else {
        e -= r.mutation[i][j];
      }
    }
    if (pick < 0) {  // rounding at the top end: take the last positive rate
      for (int c = 0; c < m; ++c)
        if (r.birth[i][c] > 0) pick = c;
      for (int j = 0; j < k; ++j)
        if (j != i && r.mutation[i][j] > 0) pick = j, birth = false;
    }
    if (birth) {
      auto [j1, j2] = pair_at(k, pick);
      int v = tree.add_node(i + 1, NodeKind::binary, parent, t);
      lin.add(j1, v);
      lin.add(j2, v);
      if (lin.total > max_lineages)
        fail(ErrorKind::resource, "Yule tree exceeded " + std::to_string(max_lineages) + " lineages");
      if (lin.total >= N) break;
    } else {
      int v = tree.add_node(i + 1, NodeKind::unary, parent, t);
      lin.add(pick, v);
    }
  }
  for (int i = 0; i < k; ++i)
    for (int parent : lin.by_type[i]) tree.add_node(i + 1, NodeKind::leaf, parent, t);
  return tree;
}

TypedTree simulate_yule(const YuleParams& yp, const YuleStop& stop, int initial_type, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  return simulate_yule(yp, stop, initial_type, rng);
}

MomentMatrices build_moment_matrices(const YuleRates& r, int k) {
  const int m = num_pairs(k);
  MomentMatrices M;
  // B[l][i]: expected change of type-l leaf count per unit time from one type-i lineage
  M.B = Mat::Zero(k, k);
  for (int i = 0; i < k; ++i) {
    for (int c = 0; c < m; ++c) {
      auto [a, b] = pair_at(k, c);
      M.B(a, i) += r.birth[i][c];
      M.B(b, i) += r.birth[i][c];
      M.B(i, i) -= r.birth[i][c];
    }
    for (int j = 0; j < k; ++j)
      if (j != i) {
        M.B(j, i) += r.mutation[i][j];
        M.B(i, i) -= r.mutation[i][j];
      }
  }
  // cherries: a leaf event destroys the cherry; a mutation moves it to another leaf-type pair
  Mat A = Mat::Zero(m, m);
  for (int col = 0; col < m; ++col) {
    auto [a, b] = pair_at(k, col);
    A(col, col) -= r.total(a) + r.total(b);
    for (int y = 0; y < k; ++y) {
      if (y != a) A(pair_index(k, y, b), col) += r.mutation[a][y];
      if (y != b) A(pair_index(k, a, y), col) += r.mutation[b][y];
    }
  }
  for (int l = 0; l < k; ++l) {
    M.A.push_back(A);
    M.q.push_back(Eigen::Map<const Vec>(r.birth[l].data(), m));
  }
  // pendants (l, leaf type)
  M.C = Mat::Zero(k * k, k * k);
  M.U = Mat::Zero(k * k, k * m);
  for (int l = 0; l < k; ++l)
    for (int j = 0; j < k; ++j) {
      int col = l * k + j;
      M.C(col, col) -= r.total(j);
      for (int y = 0; y < k; ++y)
        if (y != j) M.C(l * k + y, col) += r.mutation[j][y];
    }
  for (int l = 0; l < k; ++l)
    for (int c = 0; c < m; ++c) {
      auto [a, b] = pair_at(k, c);
      int col = l * m + c;
      // a birth on one leaf leaves its sibling as a pendant
      M.U(l * k + b, col) += r.birth_total(a);
      M.U(l * k + a, col) += r.birth_total(b);
    }
  return M;
}

MomentMatrices build_moment_matrices(const YuleParams& yp, double t) {
  yp.validate();
  return build_moment_matrices(yp.at(t), yp.k);
}

Mat MomentMatrices::system() const {
  const int k = static_cast<int>(B.rows());
  const int m = static_cast<int>(A.front().rows());
  const int d = k + k * m + k * k;
  Mat S = Mat::Zero(d, d);
  S.topLeftCorner(k, k) = B;
  for (int l = 0; l < k; ++l) {
    S.block(k + l * m, k + l * m, m, m) = A[l];
    S.block(k + l * m, l, m, 1) = q[l];
  }
  S.block(k + k * m, k + k * m, k * k, k * k) = C;
  S.block(k + k * m, k, k * k, k * m) = U;
  return S;
}

namespace {

YuleMoments unpack(const Vec& y, int k, double t) {
  const int m = num_pairs(k);
  YuleMoments r;
  r.t = t;
  r.nu = y.head(k);
  r.rho = r.nu.sum();
  r.mu = y.segment(k, k * m);
  r.gamma = y.tail(k * k);
  return r;
}

Vec initial_state(int k, int initial_type) {
  const int m = num_pairs(k);
  Vec y = Vec::Zero(k + k * m + k * k);
  y(initial_type - 1) = 1.0;
  return y;
}

}  // namespace

std::vector<YuleMoments> yule_moments_grid(const YuleParams& yp, const std::vector<double>& times, int initial_type) {
  yp.validate();
  if (initial_type < 1 || initial_type > yp.k) fail(ErrorKind::parameter, "initial type out of range");
  for (size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] >= 0) || !std::isfinite(times[i])) fail(ErrorKind::parameter, "times must be finite and >= 0");
    if (i > 0 && times[i] < times[i - 1]) fail(ErrorKind::parameter, "times must be ascending");
  }
  const int k = yp.k;
  std::vector<YuleMoments> out;
  Vec y = initial_state(k, initial_type);
  double t = 0;
  size_t next = 0;
  while (next < times.size() && times[next] == 0) out.push_back(unpack(y, k, 0.0)), ++next;
  double worst = 0;
  while (next < times.size()) {
    int seg = yp.segment_at(t);
    double seg_end = seg < static_cast<int>(yp.breakpoints.size()) ? yp.breakpoints[seg]
                                                                    : std::numeric_limits<double>::infinity();
    double stop = std::min(seg_end, times.back());
    Mat S = build_moment_matrices(yp.segments[seg], k).system();
    auto f = [&S](double, const Vec& z, Vec& dz) { dz.noalias() = S * z; };
    numerics::OdeOptions opt;
    opt.rtol = 1e-10;
    opt.atol = 1e-12;
    std::vector<double> local;
    for (size_t i = next; i < times.size() && times[i] <= stop; ++i) local.push_back(times[i]);
    opt.stops = local;
    auto sol = numerics::integrate_ode(f, y, t, stop, opt);
    // integral-form residual between consecutive output points
    std::vector<double> pts{t};
    pts.insert(pts.end(), local.begin(), local.end());
    if (pts.back() != stop) pts.push_back(stop);
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
      if (pts[i + 1] <= pts[i]) continue;
      auto g = [&](double s) -> Mat { return S * sol(s); };
      Vec integral = numerics::integrate(g, pts[i], pts[i + 1], 1e-12, 1e-14);
      Vec end = sol(pts[i + 1]);
      Vec r = end - sol(pts[i]) - integral;
      worst = std::max(worst, r.cwiseAbs().maxCoeff() / std::max(1.0, end.cwiseAbs().maxCoeff()));
    }
    for (double tt : local) {
      out.push_back(unpack(sol(tt), k, tt));
      out.back().max_residual = worst;
      ++next;
    }
    y = sol.back();
    t = stop;
  }
  return out;
}

YuleMoments yule_moments(const YuleParams& yp, double t, int initial_type, YuleMethod method) {
  yp.validate();
  if (initial_type < 1 || initial_type > yp.k) fail(ErrorKind::parameter, "initial type out of range");
  if (!(t >= 0) || !std::isfinite(t)) fail(ErrorKind::parameter, "t must be finite and >= 0");
  if (method == YuleMethod::ode) return yule_moments_grid(yp, {t}, initial_type).front();
  Vec y = initial_state(yp.k, initial_type);
  double s = 0;
  while (s < t) {
    int seg = yp.segment_at(s);
    double end = seg < static_cast<int>(yp.breakpoints.size()) ? std::min(t, yp.breakpoints[seg]) : t;
    Mat S = build_moment_matrices(yp.segments[seg], yp.k).system();
    y = numerics::matrix_exp(S * (end - s)) * y;
    s = end;
  }
  return unpack(y, yp.k, t);
}

bool irreducible(const Mat& B) {
  const int k = static_cast<int>(B.rows());
  for (int start = 0; start < k; ++start) {
    std::vector<char> seen(k, 0);
    std::vector<int> stack{start};
    seen[start] = 1;
    int count = 1;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int w = 0; w < k; ++w)
        if (w != v && !seen[w] && B(w, v) > 0) {
          seen[w] = 1;
          ++count;
          stack.push_back(w);
        }
    }
    if (count != k) return false;
  }
  return true;
}

YuleLimits limit_fractions(const YuleParams& yp) {
  yp.validate();
  const int k = yp.k, m = num_pairs(k);
  auto M = build_moment_matrices(yp.limit(), k);
  if (!irreducible(M.B))
    fail(ErrorKind::model, "limiting leaf-growth matrix B is reducible; limit fractions are not identified");
  YuleLimits L;
  auto pp = numerics::perron(M.B);
  L.lambda = pp.lambda;
  L.u = pp.u;
  if (L.lambda < -1e-12) fail(ErrorKind::numerical, "Perron root of B is negative");
  Vec wall(k * m);
  for (int l = 0; l < k; ++l) {
    Mat Al = M.A[l] - L.lambda * Mat::Identity(m, m);
    Vec w = -L.u(l) * numerics::solve_linear(Al, M.q[l]);
    L.w.push_back(w);
    wall.segment(l * m, m) = w;
  }
  Mat Cl = M.C - L.lambda * Mat::Identity(k * k, k * k);
  L.w_star = -numerics::solve_linear(Cl, M.U * wall);
  L.identity_residual = std::abs(2 * wall.sum() + L.w_star.sum() - 1.0);
  return L;
}

double time_for_mean_leaves(const YuleParams& yp, double target, int initial_type) {
  if (!(target >= 1)) fail(ErrorKind::parameter, "target leaf count must be >= 1");
  auto rho = [&](double t) { return yule_moments(yp, t, initial_type, YuleMethod::matrix_exp).rho; };
  double lo = 0, hi = 1;
  while (rho(hi) < target) {
    lo = hi;
    hi *= 2;
    if (hi > 1e6) fail(ErrorKind::condition, "mean leaf count does not reach the target");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    double mid = 0.5 * (lo + hi);
    (rho(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace typetree
