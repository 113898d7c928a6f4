#include "typetree/inference.hpp"

#include <algorithm>
#include <cmath>

#include "typetree/error.hpp"
#include "typetree/index_order.hpp"

namespace typetree {

using numerics::Mat;
using numerics::Vec;

ErmEstimate infer_erm(const std::vector<double>& x) {
  if (x.size() != 6 && x.size() != 10)
    fail(ErrorKind::parameter, "expected 6 cherry entries (or a 10-vector) in paper_k2 order");
  for (double v : x)
    if (!(v >= 0) || !std::isfinite(v)) fail(ErrorKind::parameter, "cherry counts must be finite and >= 0");
  ErmEstimate e;
  double s1 = x[0] + x[1] + x[2];
  double s2 = x[3] + x[4] + x[5];
  e.block_totals = {s1, s2};
  if (s1 <= 0)
    fail(ErrorKind::inference, "no cherries with a type-1 branch point (block C1 is zero); q1 is not estimable");
  if (s2 <= 0)
    fail(ErrorKind::inference, "no cherries with a type-2 branch point (block C2 is zero); q2 is not estimable");
  e.params.k = 2;
  // paper_k2 lists the type-2 block as (22, 12, 11)
  e.params.q = {{x[0] / s1, x[1] / s1, x[2] / s1}, {x[5] / s2, x[4] / s2, x[3] / s2}};
  return e;
}

ErmEstimate infer_erm(const Census& c) {
  if (c.k != 2) fail(ErrorKind::parameter, "ERM inference needs a two-type census");
  Census p = c.reindexed(Ordering::paper_k2);
  std::vector<double> x(p.cherry_counts.begin(), p.cherry_counts.end());
  return infer_erm(x);
}

const char* to_string(Solvability s) {
  switch (s) {
    case Solvability::solvable: return "solvable";
    case Solvability::not_solvable: return "not_solvable";
    case Solvability::boundary: return "boundary";
  }
  return "?";
}

SolvabilityReport reconstruction_solvable(const std::vector<double>& v, double band) {
  if (v.size() < 6) fail(ErrorKind::parameter, "need the six cherry fractions in paper_k2 order");
  double s1 = v[0] + v[1] + v[2], s2 = v[3] + v[4] + v[5];
  if (s1 <= 0 || s2 <= 0) fail(ErrorKind::inference, "a cherry block is zero; criterion undefined");
  SolvabilityReport r;
  r.threshold = 1.0 / std::sqrt(2.0);
  r.value = std::abs(std::sqrt(v[0] / s1) + std::sqrt(v[3] / s2) - 1.0);
  if (std::abs(r.value - r.threshold) <= band) r.status = Solvability::boundary;
  else r.status = r.value > r.threshold ? Solvability::solvable : Solvability::not_solvable;
  return r;
}

YuleEstimate infer_yule(const std::vector<Vec>& w, const Vec& w_star, const std::vector<double>& r,
                        std::optional<double> lambda) {
  const int k = static_cast<int>(r.size());
  if (k < 1) fail(ErrorKind::parameter, "need at least one type");
  const int m = num_pairs(k);
  if (static_cast<int>(w.size()) != k) fail(ErrorKind::parameter, "need one cherry block per type");
  for (const auto& b : w)
    if (b.size() != m) fail(ErrorKind::parameter, "cherry blocks need k(k+1)/2 entries");
  if (w_star.size() != k * k) fail(ErrorKind::parameter, "pendant vector needs k^2 entries");
  for (double x : r)
    if (!(x >= 0) || !std::isfinite(x)) fail(ErrorKind::parameter, "birth totals must be finite and >= 0");

  YuleEstimate est;
  if (lambda) {
    est.lambda = *lambda;
  } else {
    bool same = std::all_of(r.begin(), r.end(), [&](double x) { return std::abs(x - r[0]) <= 1e-12 * (1 + r[0]); });
    if (!same) fail(ErrorKind::parameter, "lambda is required when birth totals differ between types");
    est.lambda = r[0];
  }
  const double lam = est.lambda;
  double total = 0;
  for (const auto& b : w) total += 2 * b.sum();
  total += w_star.sum();
  if (std::abs(total - 1.0) > 1e-6)
    est.warnings.push_back("fractions violate 2*sum(w) + sum(w*) = 1 by " + std::to_string(total - 1.0));

  Vec wall(k * m);
  for (int l = 0; l < k; ++l) wall.segment(l * m, m) = w[l];
  // U depends only on r
  Mat U = Mat::Zero(k * k, k * m);
  for (int l = 0; l < k; ++l)
    for (int c = 0; c < m; ++c) {
      auto [a, b] = pair_at(k, c);
      U(l * k + b, l * m + c) += r[a];
      U(l * k + a, l * m + c) += r[b];
    }
  Vec Uw = U * wall;

  // stage 1: unknown mutation rates q_i^j (i != j), one equation per pendant type
  std::vector<std::array<int, 2>> unknowns;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      if (i != j) unknowns.push_back({i, j});
  Mat mut = Mat::Zero(k, k);
  if (!unknowns.empty()) {
    const int nu = static_cast<int>(unknowns.size());
    Mat M = Mat::Zero(k * k, nu);
    Vec rhs(k * k);
    for (int l = 0; l < k; ++l)
      for (int mm = 0; mm < k; ++mm) {
        int row = l * k + mm;
        rhs(row) = (r[mm] + lam) * w_star(row) - Uw(row);
        for (int u = 0; u < nu; ++u) {
          auto [i, j] = unknowns[u];
          if (i == mm) M(row, u) -= w_star(row);          // leaving pendant type (l, mm)
          if (j == mm) M(row, u) += w_star(l * k + i);    // arriving from (l, i)
        }
      }
    auto ls = numerics::least_squares(M, rhs);
    est.stage1_rank = ls.rank;
    est.stage1_residual = ls.residual;
    if (ls.rank < nu) {
      std::vector<std::vector<double>> ns;
      for (int c = 0; c < ls.null_space.cols(); ++c)
        ns.emplace_back(ls.null_space.col(c).data(), ls.null_space.col(c).data() + nu);
      throw NonIdentifiableError("mutation rates are not identified: stage-1 system has rank " +
                                     std::to_string(ls.rank) + " < " + std::to_string(nu),
                                 ns);
    }
    for (int u = 0; u < nu; ++u) mut(unknowns[u][0], unknowns[u][1]) = ls.x(u);
  }

  // u_l: share of leaves of type l, counting every cherry leaf and every pendant of leaf type l
  est.u.assign(k, 0.0);
  for (int i = 0; i < k; ++i)
    for (int c = 0; c < m; ++c) {
      auto [a, b] = pair_at(k, c);
      est.u[a] += w[i](c);
      est.u[b] += w[i](c);
    }
  for (int i = 0; i < k; ++i)
    for (int l = 0; l < k; ++l) est.u[l] += w_star(i * k + l);

  // stage 2: q_(l) = -(A_l - lambda I) w_l / u_l with A_l from the totals q_i = r_i + sum_j q_i^j
  YuleRates rates;
  rates.birth.assign(k, std::vector<double>(m, 0.0));
  rates.mutation.assign(k, std::vector<double>(k, 0.0));
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) rates.mutation[i][j] = i == j ? 0.0 : mut(i, j);
  std::vector<double> qtot(k);
  for (int i = 0; i < k; ++i) qtot[i] = r[i] + mut.row(i).sum();
  Mat A = Mat::Zero(m, m);
  for (int col = 0; col < m; ++col) {
    auto [a, b] = pair_at(k, col);
    A(col, col) -= qtot[a] + qtot[b];
    for (int y = 0; y < k; ++y) {
      if (y != a) A(pair_index(k, y, b), col) += mut(a, y);
      if (y != b) A(pair_index(k, a, y), col) += mut(b, y);
    }
  }
  Mat Al = A - lam * Mat::Identity(m, m);
  for (int l = 0; l < k; ++l) {
    if (est.u[l] <= 0)
      fail(ErrorKind::inference, "no leaves of type " + std::to_string(l + 1) + "; its birth rates are not estimable");
    Vec q = -(Al * w[l]) / est.u[l];
    for (int c = 0; c < m; ++c) rates.birth[l][c] = q(c);
    est.stage2_residual = std::max(est.stage2_residual, std::abs(q.sum() - r[l]));
  }
  for (int i = 0; i < k; ++i) {
    for (int c = 0; c < m; ++c)
      if (rates.birth[i][c] < -1e-8)
        est.warnings.push_back("negative birth rate recovered for type " + std::to_string(i + 1));
    for (int j = 0; j < k; ++j)
      if (rates.mutation[i][j] < -1e-8)
        est.warnings.push_back("negative mutation rate recovered for " + std::to_string(i + 1) + "->" +
                               std::to_string(j + 1));
  }
  est.rates = std::move(rates);
  return est;
}

namespace {
double spread_of(const std::vector<double>& v) {
  auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi - *lo;
}
double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}
}  // namespace

PEstimate estimate_p_cladogenetic(const std::array<double, 3>& w1) {
  for (double x : w1)
    if (!(x >= -1e-12) || !std::isfinite(x)) fail(ErrorKind::parameter, "fractions must be finite and >= 0");
  double disc = 1.0 - 12.0 * w1[1];
  if (disc < -1e-9)
    fail(ErrorKind::inference, "inconsistent fractions: 1 - 12 w1^12 = " + std::to_string(disc) + " < 0");
  double sq = std::sqrt(std::max(0.0, disc));
  PEstimate e;
  double pa = 1.0 - std::sqrt(std::max(0.0, 6.0 * w1[0]));
  double pb = std::sqrt(std::max(0.0, 6.0 * w1[2]));
  e.roots = {0.5 * (1 - sq), 0.5 * (1 + sq)};
  double ref = 0.5 * (pa + pb);
  double d0 = std::abs(e.roots[0] - ref), d1 = std::abs(e.roots[1] - ref);
  double pc = d0 <= d1 ? e.roots[0] : e.roots[1];
  e.tie = std::abs(d0 - d1) <= std::max(std::abs(pa - pb), 1e-12);
  e.estimates = {pa, pb, pc};
  e.spread = spread_of(e.estimates);
  e.p = mean_of(e.estimates);
  return e;
}

PEstimate estimate_p_anagenetic(const std::array<double, 3>& w1, const std::array<double, 3>& w2,
                                const std::array<double, 4>& ws) {
  // ws = (w1^1, w1^2, w2^1, w2^2)
  std::array<double, 4> num = {2 * w1[0] + w1[1] - 2 * ws[0], w1[1] + 2 * w1[2] - 2 * ws[1],
                               2 * w2[0] + w2[1] - 2 * ws[2], w2[1] + 2 * w2[2] - 2 * ws[3]};
  std::array<double, 4> den = {ws[0] - ws[1], ws[1] - ws[0], ws[2] - ws[3], ws[3] - ws[2]};
  PEstimate e;
  if (std::all_of(num.begin(), num.end(), [](double x) { return std::abs(x) < 1e-12; })) {
    e.estimates = {0, 0, 0, 0};
    return e;
  }
  for (double d : den)
    if (std::abs(d) < 1e-9)
      fail(ErrorKind::inference, "pendant fractions are nearly symmetric; anagenetic estimators are undefined");
  for (int i = 0; i < 4; ++i) e.estimates.push_back(num[i] / den[i]);
  e.spread = spread_of(e.estimates);
  e.p = mean_of(e.estimates);
  return e;
}

SplitModel SplitModel::from_rates(const YuleRates& r) {
  if (r.birth.size() != 2) fail(ErrorKind::parameter, "comparison needs k = 2");
  if (r.mutation_total(0) > 0 || r.mutation_total(1) > 0)
    fail(ErrorKind::condition, "comparison applies to models without mutations");
  double q1 = r.birth_total(0), q2 = r.birth_total(1);
  if (q1 <= 0 || q2 <= 0) fail(ErrorKind::condition, "both types need positive birth rates");
  SplitModel s;
  for (int c = 0; c < 3; ++c) {
    s.p1[c] = r.birth[0][c] / q1;
    s.p2[c] = r.birth[1][c] / q2;
  }
  s.a1 = q1 / (q1 + q2);
  return s;
}

YuleRates SplitModel::to_rates(double total) const {
  YuleRates r;
  double q1 = a1 * total, q2 = (1 - a1) * total;
  r.birth = {{p1[0] * q1, p1[1] * q1, p1[2] * q1}, {p2[0] * q2, p2[1] * q2, p2[2] * q2}};
  r.mutation = {{0, 0}, {0, 0}};
  return r;
}

double SplitModel::condition_gap() const { return (p1[0] - p1[2]) - 1.0 - (p2[0] - p2[2]); }

std::array<std::array<double, 3>, 2> comparison_fractions(const SplitModel& s) {
  const double a = s.a1, d = s.p1[0] - s.p1[2];
  const double den[3] = {a * (2 * d + 1) - d + 1, a * (2 * d - 1) - d + 2, a * (2 * d - 3) - d + 3};
  std::array<std::array<double, 3>, 2> w{};
  for (int c = 0; c < 3; ++c) {
    w[0][c] = a * s.p1[c] * d / den[c];
    w[1][c] = s.p2[c] * (1 - d) * (1 - a) / den[c];
  }
  return w;
}

ComparisonReport compare_models(const YuleParams& a, const YuleParams& b, double tol) {
  if (a.k != 2 || b.k != 2) fail(ErrorKind::condition, "comparison needs k = 2");
  SplitModel sa = SplitModel::from_rates(a.limit());
  SplitModel sb = SplitModel::from_rates(b.limit());
  for (const auto* s : {&sa, &sb})
    if (std::abs(s->condition_gap()) > tol)
      fail(ErrorKind::condition, "splitting-probability condition fails (gap " + std::to_string(s->condition_gap()) +
                                     "); the comparison does not apply");
  ComparisonReport r;
  r.a1 = sa.a1;
  r.a1_prime = sb.a1;
  r.w = comparison_fractions(sa);
  r.w_prime = comparison_fractions(sb);
  const double diff_a = r.a1_prime - r.a1;
  const int want1 = std::abs(diff_a) <= tol ? 0 : (diff_a > 0 ? 1 : -1);
  r.matches_claim = true;
  for (int l = 0; l < 2; ++l)
    for (int c = 0; c < 3; ++c) {
      double d = r.w_prime[l][c] - r.w[l][c];
      r.direction[l][c] = std::abs(d) <= 1e-15 ? 0 : (d > 0 ? 1 : -1);
      int want = l == 0 ? want1 : -want1;
      double p = l == 0 ? sa.p1[c] : sa.p2[c];
      double pp = l == 0 ? sb.p1[c] : sb.p2[c];
      bool degenerate = p == 0 && pp == 0;
      if (r.direction[l][c] != want && !(degenerate && r.direction[l][c] == 0)) r.matches_claim = false;
    }
  return r;
}

}  // namespace typetree
