#include "typetree/erm_analytics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <set>

#include "typetree/error.hpp"

namespace typetree {

using numerics::Mat;
using numerics::Vec;

const char* to_string(MomentMethod m) {
  switch (m) {
    case MomentMethod::automatic: return "automatic";
    case MomentMethod::closed_form: return "closed_form";
    case MomentMethod::recurrence: return "recurrence";
  }
  return "?";
}

bool star_condition(const ErmParams& params, double tol) {
  if (params.k != 2) return false;
  double d = params.c1() - params.c2();
  return std::abs(d - 2.0) > tol && std::abs(d + 2.0) > tol;
}

namespace {

void check_args(const ErmParams& params, long n, int initial_type) {
  params.validate();
  if (n < 1) fail(ErrorKind::parameter, "n must be >= 1");
  if (initial_type < 1 || initial_type > params.k) fail(ErrorKind::parameter, "initial type out of range");
}

bool use_closed_form(const ErmParams& params, MomentMethod method) {
  if (method == MomentMethod::recurrence) return false;
  bool ok = params.k == 2 && star_condition(params);
  if (method == MomentMethod::closed_form && !ok) {
    if (params.k != 2) fail(ErrorKind::condition, "closed-form moments need k = 2; use the recurrence method");
    fail(ErrorKind::condition, "c1 - c2 is in {-2, 2}; closed form undefined, use the recurrence method");
  }
  return ok;
}

// M[j][i]: expected change in type-j leaves when a type-i leaf splits.
Mat leaf_drift(const ErmParams& p) {
  Mat M = Mat::Zero(p.k, p.k);
  for (int i = 0; i < p.k; ++i) {
    for (int c = 0; c < num_pairs(p.k); ++c) {
      auto [a, b] = pair_at(p.k, c);
      M(a, i) += p.q[i][c];
      M(b, i) += p.q[i][c];
    }
    M(i, i) -= 1.0;
  }
  return M;
}

Vec leaf_means_recurrence(const ErmParams& p, long n, int initial_type) {
  Mat M = leaf_drift(p);
  Vec nu = Vec::Zero(p.k);
  nu(initial_type - 1) = 1.0;
  for (long m = 1; m < n; ++m) nu = nu + M * nu / static_cast<double>(m);
  return nu;
}

// Generic-order cherry means at n, plus the value at 3 when wanted.
Vec cherry_means_recurrence(const ErmParams& p, long n, int initial_type, Vec* at3 = nullptr) {
  Mat M = leaf_drift(p);
  const int m = num_pairs(p.k);
  Vec nu = Vec::Zero(p.k);
  nu(initial_type - 1) = 1.0;
  Vec mu = Vec::Zero(p.k * m);
  for (long s = 1; s < n; ++s) {
    double ds = static_cast<double>(s);
    Vec next(p.k * m);
    for (int l = 0; l < p.k; ++l)
      for (int c = 0; c < m; ++c)
        next(l * m + c) = (ds - 2.0) / ds * mu(l * m + c) + p.q[l][c] * nu(l) / ds;
    mu = next;
    nu = nu + M * nu / ds;
    if (at3 && s + 1 == 3) *at3 = mu;
  }
  if (at3 && n < 3) *at3 = mu;
  return mu;
}

Vec to_default_order(const ErmParams& p, const Vec& generic) {
  IndexOrder order = IndexOrder::make(p.k, default_ordering(p.k));
  const int m = num_pairs(p.k);
  Vec out(generic.size());
  for (int pos = 0; pos < order.num_cherries(); ++pos) {
    auto [l, a, b] = order.cherry_at(pos);
    out(pos) = generic(l * m + pair_index(p.k, a, b));
  }
  return out;
}

std::vector<double> to_std(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

// Closed-form nu_1 (k = 2); nu2 given by the complement.
double nu1_closed(const ErmParams& p, long n, double nu1_2) {
  const double c1 = p.c1(), c2 = p.c2(), delta = c1 - c2, D = 2.0 - delta;
  double g = numerics::gamma_ratio(delta, static_cast<double>(n));
  // 1/Gamma(delta+1) written as (delta+1)/Gamma(delta+2) so delta = -1 is finite
  return c2 * n / D - (2 * c2 - D * nu1_2) * g * (delta + 1.0) / (D * std::tgamma(delta + 2.0));
}

}  // namespace

std::vector<double> mean_leaves(const ErmParams& params, long n, int initial_type, MomentMethod method) {
  check_args(params, n, initial_type);
  bool closed = use_closed_form(params, method);
  if (!closed || n <= 2) return to_std(leaf_means_recurrence(params, n, initial_type));
  double nu1_2 = initial_type == 1 ? params.c1() : params.c2();
  double nu1 = nu1_closed(params, n, nu1_2);
  return {nu1, static_cast<double>(n) - nu1};
}

std::vector<double> mean_cherries(const ErmParams& params, long n, int initial_type, MomentMethod method) {
  check_args(params, n, initial_type);
  bool closed = use_closed_form(params, method);
  Vec mu3;
  Vec rec = cherry_means_recurrence(params, n, initial_type, &mu3);
  if (!closed || n <= 3) return to_std(to_default_order(params, rec));

  const double c1 = params.c1(), c2 = params.c2(), delta = c1 - c2, D = 2.0 - delta;
  const double nu1_2 = initial_type == 1 ? c1 : c2;
  const double g = numerics::gamma_ratio(delta, static_cast<double>(n)) / std::tgamma(delta + 2.0);
  const double dn = static_cast<double>(n);
  Vec out(6);
  for (int l = 0; l < 2; ++l) {
    // type 2 uses c2' = 2 - c1 and nu_2(2) = 2 - nu_1(2); D and delta are shared
    double cc2 = l == 0 ? c2 : 2.0 - c1;
    double nu2 = l == 0 ? nu1_2 : 2.0 - nu1_2;
    double Cn = (2 * cc2 - D * nu2) * g / D;
    for (int c = 0; c < 3; ++c) {
      double q = params.q[l][c];
      out(l * 3 + c) = (2 * mu3(l * 3 + c) - q * nu2) / ((dn - 1) * (dn - 2)) + dn * q * cc2 / (3 * D) - q * Cn;
    }
  }
  return to_std(to_default_order(params, out));
}

namespace {

// Exact mean and variance of one cherry count (k = 2) from the joint moments of
// x = #type-l leaves and C = #target cherries, basis {1, x, C, x^2, xC, C^2}.
std::array<double, 2> cherry_moments(const ErmParams& p, int l, int j1, int j2, long n, int initial_type) {
  const int m = (j1 == l) + (j2 == l);
  double E[6] = {1.0, 0, 0, 0, 0, 0};  // 1, x, C, xx, xC, CC
  double x0 = initial_type - 1 == l ? 1.0 : 0.0;
  E[1] = x0;
  E[3] = x0 * x0;
  struct Cls {
    double a0, ax, aC;
    int type;
    bool in_target;
  };
  for (long s = 1; s < n; ++s) {
    const double ds = static_cast<double>(s);
    std::vector<Cls> cls;
    if (j1 == j2) {
      cls.push_back({0, 0, 2, j1, true});
    } else {
      cls.push_back({0, 0, 1, j1, true});
      cls.push_back({0, 0, 1, j2, true});
    }
    cls.push_back({0, 1, -static_cast<double>(m), l, false});
    cls.push_back({ds, -1, -static_cast<double>(2 - m), 1 - l, false});
    double inc[5] = {0, 0, 0, 0, 0};
    for (const auto& c : cls) {
      for (int o = 0; o < 3; ++o) {
        double qq = p.q[c.type][o];
        if (qq == 0) continue;
        auto [o1, o2] = pair_at(2, o);
        double dC = (c.in_target ? -1.0 : 0.0) + ((c.type == l && o1 == j1 && o2 == j2) ? 1.0 : 0.0);
        double dx = (c.type == l ? -1.0 : 0.0) + (o1 == l) + (o2 == l);
        // F(x+dx, C+dC) - F(x, C) as (b0 + bx x + bC C)
        double diffs[5][3] = {{dx, 0, 0}, {dC, 0, 0}, {dx * dx, 2 * dx, 0}, {dx * dC, dC, dx}, {dC * dC, 0, 2 * dC}};
        for (int key = 0; key < 5; ++key) {
          double b0 = diffs[key][0], bx = diffs[key][1], bC = diffs[key][2];
          double val = c.a0 * b0 * E[0] + (c.a0 * bx + c.ax * b0) * E[1] + (c.a0 * bC + c.aC * b0) * E[2] +
                       c.ax * bx * E[3] + (c.ax * bC + c.aC * bx) * E[4] + c.aC * bC * E[5];
          inc[key] += qq * val / ds;
        }
      }
    }
    for (int key = 0; key < 5; ++key) E[key + 1] += inc[key];
  }
  return {E[2], E[5] - E[2] * E[2]};
}

}  // namespace

std::vector<double> var_cherries(const ErmParams& params, long n, int initial_type) {
  check_args(params, n, initial_type);
  if (params.k != 2) fail(ErrorKind::condition, "cherry variances are implemented for k = 2");
  IndexOrder order = IndexOrder::paper_k2();
  std::vector<double> out;
  for (int pos = 0; pos < order.num_cherries(); ++pos) {
    auto [l, a, b] = order.cherry_at(pos);
    out.push_back(std::max(0.0, cherry_moments(params, l, a, b, n, initial_type)[1]));
  }
  return out;
}

MomentReport moment_report(const ErmParams& params, long n, int initial_type, MomentMethod method) {
  MomentReport r;
  r.n = n;
  bool closed = use_closed_form(params, method);
  r.method = closed ? MomentMethod::closed_form : MomentMethod::recurrence;
  r.nu = mean_leaves(params, n, initial_type, r.method);
  r.mu = mean_cherries(params, n, initial_type, r.method);
  if (params.k == 2) {
    r.sigma2 = var_cherries(params, n, initial_type);
    double d = params.c1() - params.c2();
    r.asymptotics_apply = true;
    for (double bad : {-2.0, -1.0, 0.0, 1.0, 1.5, 2.0})
      if (std::abs(d - bad) <= 1e-9) r.asymptotics_apply = false;
  }
  return r;
}

namespace {

Mat restrict(const Mat& M, const std::vector<int>& s) {
  Mat R(s.size(), s.size());
  for (size_t i = 0; i < s.size(); ++i)
    for (size_t j = 0; j < s.size(); ++j) R(i, j) = M(s[i], s[j]);
  return R;
}
Vec restrict(const Vec& v, const std::vector<int>& s) {
  Vec R(s.size());
  for (size_t i = 0; i < s.size(); ++i) R(i) = v(s[i]);
  return R;
}
Mat embed(const Mat& M, const std::vector<int>& s, int d) {
  Mat R = Mat::Zero(d, d);
  for (size_t i = 0; i < s.size(); ++i)
    for (size_t j = 0; j < s.size(); ++j) R(s[i], s[j]) = M(i, j);
  return R;
}
Vec embed(const Vec& v, const std::vector<int>& s, int d) {
  Vec R = Vec::Zero(d);
  for (size_t i = 0; i < s.size(); ++i) R(s[i]) = v(i);
  return R;
}

// Eigenvector of M for a simple real eigenvalue lambda, unit 2-norm, largest entry positive.
Vec null_vector(const Mat& M, double lambda) {
  Mat S = M - lambda * Mat::Identity(M.rows(), M.cols());
  Eigen::JacobiSVD<Mat> svd(S, Eigen::ComputeFullV);
  Vec v = svd.matrixV().col(M.cols() - 1);
  Eigen::Index i;
  v.cwiseAbs().maxCoeff(&i);
  if (v(i) < 0) v = -v;
  return v;
}

// Recurrent class reached from the initial balls.
std::vector<int> recurrent_support(const UrnModel& model, int initial_type) {
  auto reach = model.reachable_from(model.initial_balls(initial_type));
  auto comps = model.components(reach);
  auto succ = model.successors();
  std::vector<std::vector<int>> sinks;
  for (const auto& c : comps) {
    std::set<int> in(c.begin(), c.end());
    bool closed = true;
    for (int v : c)
      for (int w : succ[v])
        if (!in.count(w)) closed = false;
    if (closed) sinks.push_back(c);
  }
  if (sinks.empty()) fail(ErrorKind::model, "no recurrent class of ball types");
  if (sinks.size() > 1)
    fail(ErrorKind::model, "urn is reducible with " + std::to_string(sinks.size()) +
                               " closed classes; the limit is random, no deterministic fraction vector");
  return sinks.front();
}

}  // namespace

UrnSpec urn_matrix(const ErmParams& params) {
  UrnModel model(params);
  UrnSpec s;
  s.order = model.order();
  s.a = model.weights();
  s.A = model.generating_matrix();
  auto eig = numerics::eigen_decompose(s.A);
  s.eigenvalues = eig.values;
  s.eigen_residual = eig.max_residual;
  s.u1 = s.a;
  // v1 on the full matrix: solve (A - I)v = 0 with a.v = 1 in least squares
  const int d = model.size();
  Mat S(d + 1, d);
  S.topRows(d) = s.A - Mat::Identity(d, d);
  S.row(d) = s.a.transpose();
  Vec rhs = Vec::Zero(d + 1);
  rhs(d) = 1.0;
  s.v1 = numerics::least_squares(S, rhs).x;

  if (params.k == 2) {
    s.lambda2 = params.c1() - params.c2() - 1.0;
  } else {
    s.lambda2 = eig.values.size() > 1 ? eig.values(1).real() : 0.0;
  }
  int close = 0;
  for (int i = 0; i < eig.values.size(); ++i)
    if (std::abs(eig.values(i) - std::complex<double>(s.lambda2, 0)) < 1e-6) ++close;
  s.lambda2_simple = close == 1 && std::abs(s.lambda2 - 1.0) > 1e-6;
  if (s.lambda2_simple) {
    s.v2 = null_vector(s.A, s.lambda2);
    s.u2 = null_vector(s.A.transpose(), s.lambda2);
    s.u2 /= s.u2.dot(s.v2);
  }
  return s;
}

Vec limit_fractions_closed_form(const ErmParams& p) {
  if (p.k != 2) fail(ErrorKind::condition, "closed-form limit fractions need k = 2");
  const double c1 = p.c1(), c2 = p.c2(), D = 2.0 - c1 + c2;
  if (D <= 1e-9) fail(ErrorKind::condition, "closed-form limit fractions need 2 - c1 + c2 > 0");
  const auto& q1 = p.q[0];
  const auto& q2 = p.q[1];
  Vec v(10);
  v << q1[0] * c2, q1[1] * c2, q1[2] * c2, q2[2] * (2 - c1), q2[1] * (2 - c1), q2[0] * (2 - c1), c1 * c2 / 2,
      (2 - c1) * c2 / 2, (2 - c1) * (2 - c2) / 2, (2 - c1) * c2 / 2;
  return v / (3 * D);
}

LimitFractions limit_fractions_erm(const ErmParams& params, int initial_type) {
  UrnModel model(params);
  LimitFractions out;
  out.support = recurrent_support(model, initial_type);
  const int d = model.size();
  out.restricted = static_cast<int>(out.support.size()) < d;
  Mat A = restrict(model.generating_matrix(), out.support);
  Vec a = restrict(model.weights(), out.support);
  auto pp = numerics::perron(A);
  if (std::abs(pp.lambda - 1.0) > 1e-9)
    fail(ErrorKind::numerical, "leading eigenvalue of the recurrent urn is " + std::to_string(pp.lambda) + ", not 1");
  Vec v = pp.u / a.dot(pp.u);
  out.v1 = embed(v, out.support, d);

  if (params.k == 2 && 2.0 - params.c1() + params.c2() > 1e-9) {
    Vec cf = limit_fractions_closed_form(params);
    out.closed_form_checked = true;
    out.closed_form_discrepancy = (cf - out.v1).cwiseAbs().maxCoeff();
    if (out.closed_form_discrepancy > 1e-9)
      fail(ErrorKind::numerical, "closed-form and Perron limit vectors differ by " +
                                     std::to_string(out.closed_form_discrepancy));
  }
  return out;
}

Mat urn_b_matrix(const UrnModel& model, const Vec& v1) {
  const int d = model.size();
  Mat B = Mat::Zero(d, d);
  for (int i = 0; i < d; ++i)
    if (v1(i) != 0) B += v1(i) * model.weight(i) * model.second_moment(i);
  return B;
}

double clt_critical_constant(const ErmParams& p) {
  if (p.k != 2) fail(ErrorKind::condition, "k = 2 only");
  const double q111 = p.q[0][0], q112 = p.q[0][1], q211 = p.q[1][0];
  return -8.0 *
         (9 + 12 * q111 * q111 + 2 * q211 * q112 + 4 * q111 * q211 + 4 * q112 * q112 + 14 * q111 * q112 -
          4 * q211 - 12 * q112 - 21 * q111) /
         25.0;
}

Mat clt_covariance_critical(const ErmParams& params) {
  if (params.k != 2) fail(ErrorKind::condition, "the critical CLT is implemented for k = 2");
  params.validate();
  const double delta = params.c1() - params.c2();
  if (std::abs(delta - 1.5) > 1e-9)
    fail(ErrorKind::condition, "critical CLT needs c1 - c2 = 3/2, got " + std::to_string(delta));
  UrnModel model(params);
  const int d = model.size();
  auto lf = limit_fractions_erm(params, 1);
  const auto& s = lf.support;
  Mat A = restrict(model.generating_matrix(), s);
  Vec a = restrict(model.weights(), s);
  Vec v1 = restrict(lf.v1, s);
  const double lambda2 = delta - 1.0;
  auto eig = numerics::eigen_decompose(A);
  int close = 0;
  for (int i = 0; i < eig.values.size(); ++i)
    if (std::abs(eig.values(i) - std::complex<double>(lambda2, 0)) < 1e-6) ++close;
  if (close != 1) fail(ErrorKind::condition, "lambda2 is not a simple eigenvalue; CLT not available");
  Vec v2 = null_vector(A, lambda2);
  Vec u2 = null_vector(A.transpose(), lambda2);
  u2 /= u2.dot(v2);
  Mat B = restrict(urn_b_matrix(model, lf.v1), s);
  Mat P = v2 * u2.transpose();
  Mat T = (1.0 / lambda2) * v1 * a.dot(v2) * u2.transpose();
  Mat SII = P * B * P.transpose();
  Mat I = Mat::Identity(s.size(), s.size());
  Mat Sigma = (I - T) * SII * (I - T).transpose();
  Sigma = 0.5 * (Sigma + Sigma.transpose());
  return embed(Sigma, s, d);
}

SubcriticalCovariance clt_covariance_subcritical(const ErmParams& params, int initial_type) {
  params.validate();
  UrnModel model(params);
  const int d = model.size();
  auto lf = limit_fractions_erm(params, initial_type);
  SubcriticalCovariance out;
  out.support = lf.support;
  const auto& s = lf.support;
  const int r = static_cast<int>(s.size());
  Mat A = restrict(model.generating_matrix(), s);
  Vec a = restrict(model.weights(), s);
  Vec v1 = restrict(lf.v1, s);

  auto eig = numerics::eigen_decompose(A);
  // skip one copy of the eigenvalue 1
  bool skipped = false;
  double second = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < eig.values.size(); ++i) {
    if (!skipped && std::abs(eig.values(i) - std::complex<double>(1.0, 0.0)) < 1e-9) {
      skipped = true;
      continue;
    }
    second = std::max(second, eig.values(i).real());
  }
  if (second >= 0.5 - 1e-9)
    fail(ErrorKind::condition, "subcritical CLT needs Re(lambda2) < 1/2, got " + std::to_string(second));

  Mat B = restrict(urn_b_matrix(model, lf.v1), s);
  Mat P = v1 * a.transpose();
  Mat I = Mat::Identity(r, r);
  // e^{sA} - v1 a^T int_0^s e^{tA} dt = e^{s(A-P)}(I-P) + P, which avoids the e^s growth
  Mat AP = A - P, IP = I - P;
  auto g = [&](double t) -> Mat {
    Mat psi = numerics::matrix_exp(t * AP) * IP + P;
    return psi * B * psi.transpose() * std::exp(-t);
  };
  Mat integral = numerics::integrate_to_infinity(g, 1e-7, 1e-12, &out.quadrature);
  Mat sigma = integral - v1 * v1.transpose();
  sigma = 0.5 * (sigma + sigma.transpose());
  out.sigma = embed(sigma, s, d);
  return out;
}

}  // namespace typetree
