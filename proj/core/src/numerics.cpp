#include "typetree/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>
#include <unsupported/Eigen/MatrixFunctions>

#include "typetree/error.hpp"

namespace typetree::numerics {

namespace {

double inf_norm(const Mat& M) { return M.size() ? M.cwiseAbs().rowwise().sum().maxCoeff() : 0.0; }

bool is_metzler(const Mat& M) {
  for (int i = 0; i < M.rows(); ++i)
    for (int j = 0; j < M.cols(); ++j)
      if (i != j && M(i, j) < 0) return false;
  return true;
}

void check_finite(const Mat& M, const char* what) {
  if (!M.allFinite()) fail(ErrorKind::numerical, std::string(what) + ": non-finite input");
}

}  // namespace

EigenResult eigen_decompose(const Mat& M) {
  if (M.rows() != M.cols()) fail(ErrorKind::numerical, "eigen_decompose: matrix not square");
  check_finite(M, "eigen_decompose");
  const int n = static_cast<int>(M.rows());
  EigenResult r;
  r.metzler = is_metzler(M);
  if (n == 0) return r;

  Eigen::EigenSolver<Mat> es(M, true);
  if (es.info() != Eigen::Success) fail(ErrorKind::numerical, "eigen_decompose: QR iteration did not converge");
  Eigen::VectorXcd vals = es.eigenvalues();
  Eigen::MatrixXcd vecs = es.eigenvectors();

  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (std::abs(vals[a].real() - vals[b].real()) > 1e-12) return vals[a].real() > vals[b].real();
    return vals[a].imag() > vals[b].imag();
  });
  r.values.resize(n);
  r.right.resize(n, n);
  for (int i = 0; i < n; ++i) {
    r.values[i] = vals[idx[i]];
    r.right.col(i) = vecs.col(idx[i]);
  }

  const double scale = std::max(1.0, inf_norm(M));
  Eigen::MatrixXcd Mc = M.cast<std::complex<double>>();
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXcd v = r.right.col(i);
    double nv = v.cwiseAbs().maxCoeff();
    if (nv == 0) fail(ErrorKind::numerical, "eigen_decompose: zero eigenvector");
    v /= nv;
    r.right.col(i) = v;
    double res = (Mc * v - r.values[i] * v).cwiseAbs().maxCoeff();
    r.max_residual = std::max(r.max_residual, res);
  }
  if (r.max_residual > 1e-9 * scale) {
    std::ostringstream os;
    os << "eigen_decompose: residual " << r.max_residual << " exceeds tolerance";
    fail(ErrorKind::numerical, os.str());
  }

  // left vectors from the inverse of the right basis (valid when diagonalizable)
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(r.right);
  if (lu.isInvertible()) {
    Eigen::MatrixXcd W = lu.inverse().transpose();  // columns w_i with w_i^T v_j = delta
    double worst = 0;
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXcd w = W.col(i);
      worst = std::max(worst, (Mc.transpose() * w - r.values[i] * w).cwiseAbs().maxCoeff() /
                                  std::max(1e-300, w.cwiseAbs().maxCoeff()));
    }
    if (worst <= 1e-7 * scale) {
      r.left = W;
      r.left_valid = true;
    }
  }
  return r;
}

namespace {

// Dominant eigenvector of a Metzler matrix by power iteration on M + cI.
bool power_iterate(const Mat& M, Vec& x, double& lambda) {
  const int n = static_cast<int>(M.rows());
  double c = 0;
  for (int i = 0; i < n; ++i) c = std::max(c, -M(i, i));
  c += 1.0;
  Mat S = M + c * Mat::Identity(n, n);
  x = Vec::Constant(n, 1.0 / n);
  for (int it = 0; it < 20000; ++it) {
    Vec y = S * x;
    double s = y.sum();
    if (!(s > 0)) return false;
    y /= s;
    double diff = (y - x).cwiseAbs().maxCoeff();
    x = y;
    if (diff < 1e-15) break;
  }
  lambda = (x.dot(M * x)) / x.squaredNorm();
  double res = (M * x - lambda * x).cwiseAbs().maxCoeff();
  return res <= 1e-10 * std::max(1.0, inf_norm(M));
}

Vec dense_perron(const Mat& M, double& lambda, bool left) {
  Mat X = left ? Mat(M.transpose()) : M;
  Eigen::EigenSolver<Mat> es(X, true);
  if (es.info() != Eigen::Success) fail(ErrorKind::numerical, "perron: dense eigensolver failed");
  int best = 0;
  for (int i = 1; i < X.rows(); ++i)
    if (es.eigenvalues()[i].real() > es.eigenvalues()[best].real()) best = i;
  if (std::abs(es.eigenvalues()[best].imag()) > 1e-10)
    fail(ErrorKind::numerical, "perron: dominant eigenvalue is not real");
  lambda = es.eigenvalues()[best].real();
  Vec v = es.eigenvectors().col(best).real();
  double s = v.sum();
  if (s == 0) fail(ErrorKind::numerical, "perron: eigenvector sums to zero");
  v /= s;
  return v;
}

}  // namespace

PerronPair perron(const Mat& M) {
  if (M.rows() != M.cols() || M.rows() == 0) fail(ErrorKind::numerical, "perron: matrix must be square, nonempty");
  check_finite(M, "perron");
  if (!is_metzler(M)) fail(ErrorKind::numerical, "perron: matrix has negative off-diagonal entries");
  PerronPair p;
  Vec u, v;
  double lu = 0, lv = 0;
  bool ok_u = power_iterate(M, u, lu);
  bool ok_v = power_iterate(M.transpose(), v, lv);
  p.by_power_iteration = ok_u && ok_v;
  if (!ok_u) u = dense_perron(M, lu, false);
  if (!ok_v) v = dense_perron(M, lv, true);
  if (std::abs(lu - lv) > 1e-8 * std::max(1.0, std::abs(lu)))
    fail(ErrorKind::numerical, "perron: left and right dominant eigenvalues disagree");
  p.lambda = lu;
  p.u = u / u.sum();
  double vu = v.dot(p.u);
  if (std::abs(vu) < 1e-300) fail(ErrorKind::numerical, "perron: left and right vectors orthogonal");
  p.v = v / vu;
  double res = (M * p.u - p.lambda * p.u).cwiseAbs().maxCoeff();
  if (res > 1e-9 * std::max(1.0, inf_norm(M))) fail(ErrorKind::numerical, "perron: residual too large");
  return p;
}

Vec solve_linear(const Mat& M, const Vec& b) {
  if (M.rows() != M.cols() || M.rows() != b.size()) fail(ErrorKind::numerical, "solve_linear: dimension mismatch");
  check_finite(M, "solve_linear");
  Eigen::FullPivLU<Mat> full(M);
  if (full.rank() < M.rows()) {
    std::ostringstream os;
    os << "solve_linear: singular matrix (rank " << full.rank() << " of " << M.rows() << ")";
    fail(ErrorKind::numerical, os.str());
  }
  Eigen::PartialPivLU<Mat> lu(M);
  Vec x = lu.solve(b);
  auto bound = [&](const Vec& xx) { return 1e-10 * (inf_norm(M) * xx.cwiseAbs().maxCoeff() + b.cwiseAbs().maxCoeff()); };
  Vec r = b - M * x;
  if (r.cwiseAbs().maxCoeff() > bound(x)) {
    x += lu.solve(r);  // one step of refinement
    r = b - M * x;
    if (r.cwiseAbs().maxCoeff() > bound(x)) fail(ErrorKind::numerical, "solve_linear: residual above tolerance");
  }
  return x;
}

LeastSquaresResult least_squares(const Mat& M, const Vec& b, double rank_tol) {
  if (M.rows() != b.size()) fail(ErrorKind::numerical, "least_squares: dimension mismatch");
  check_finite(M, "least_squares");
  LeastSquaresResult out;
  Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  double smax = s.size() ? s(0) : 0.0;
  double cut = rank_tol * std::max(1.0, smax);
  int rank = 0;
  for (int i = 0; i < s.size(); ++i) rank += s(i) > cut;
  out.rank = rank;
  Vec x = Vec::Zero(M.cols());
  Vec utb = svd.matrixU().transpose() * b;
  for (int i = 0; i < rank; ++i) x += svd.matrixV().col(i) * (utb(i) / s(i));
  out.x = x;
  out.residual = (M * x - b).norm();
  int nullity = static_cast<int>(M.cols()) - rank;
  out.null_space = svd.matrixV().rightCols(nullity);
  return out;
}

Mat matrix_exp(const Mat& M) {
  if (M.rows() != M.cols()) fail(ErrorKind::numerical, "matrix_exp: matrix not square");
  check_finite(M, "matrix_exp");
  Mat E = M.exp();
  if (!E.allFinite()) fail(ErrorKind::numerical, "matrix_exp: overflow");
  return E;
}

double gamma_ratio(double a, double n) {
  const double b = a - 1.0;  // Gamma(n + b) / Gamma(n)
  if (!(n > 0)) fail(ErrorKind::numerical, "gamma_ratio: n must be positive");
  if (b == 0.0) return 1.0;
  double z = n + b;
  if (z <= 0 && z == std::floor(z)) fail(ErrorKind::numerical, "gamma_ratio: pole of the numerator");
  if (z <= 0) return std::tgamma(z) / std::tgamma(n);

  // shift upward so the Stirling difference series is accurate
  double prod = 1.0;
  double x = n;
  while (x < 20.0) {
    prod *= x / (x + b);
    x += 1.0;
  }
  static const double B2k[] = {1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30, 5.0 / 66, -691.0 / 2730, 7.0 / 6, -3617.0 / 510};
  double lr = b * std::log(x) + (x + b - 0.5) * std::log1p(b / x) - b;
  for (int k = 1; k <= 8; ++k) {
    double c = B2k[k - 1] / (2.0 * k * (2.0 * k - 1.0));
    lr += c * (std::pow(x + b, 1.0 - 2 * k) - std::pow(x, 1.0 - 2 * k));
  }
  return prod * std::exp(lr);
}

Vec DenseSolution::operator()(double time) const {
  if (t.empty()) fail(ErrorKind::numerical, "DenseSolution: empty");
  const bool asc = t.back() >= t.front();
  auto before = [&](double a, double bb) { return asc ? a < bb : a > bb; };
  if (before(time, t.front()) || before(t.back(), time)) {
    double lo = std::min(t.front(), t.back()), hi = std::max(t.front(), t.back());
    double slack = 1e-12 * std::max(1.0, hi - lo);
    if (time < lo - slack || time > hi + slack) fail(ErrorKind::numerical, "DenseSolution: time outside solved span");
    return before(time, t.front()) ? y.front() : y.back();
  }
  size_t i = std::upper_bound(t.begin(), t.end(), time, [&](double v, double e) { return before(v, e); }) - t.begin();
  if (i == 0) return y.front();
  if (i >= t.size()) return y.back();
  size_t j = i - 1;
  double h = t[i] - t[j];
  if (h == 0) return y[i];
  double s = (time - t[j]) / h;
  double s2 = s * s, s3 = s2 * s;
  double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s, h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
  return h00 * y[j] + (h10 * h) * dy[j] + h01 * y[i] + (h11 * h) * dy[i];
}

DenseSolution integrate_ode(const OdeRhs& f, const Vec& y0, double t0, double t1, const OdeOptions& opt) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;

  if (!y0.allFinite()) fail(ErrorKind::numerical, "integrate_ode: non-finite initial value");
  DenseSolution sol;
  const int n = static_cast<int>(y0.size());
  Vec y = y0, k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), err(n);
  f(t0, y, k1);
  sol.t.push_back(t0);
  sol.y.push_back(y);
  sol.dy.push_back(k1);
  const double span = t1 - t0;
  if (span == 0) return sol;
  const double dir = span > 0 ? 1.0 : -1.0;

  std::vector<double> stops;
  for (double s : opt.stops)
    if ((s - t0) * dir > 0 && (t1 - s) * dir > 0) stops.push_back(s);
  std::sort(stops.begin(), stops.end(), [&](double a, double b) { return a * dir < b * dir; });
  stops.push_back(t1);
  size_t next_stop = 0;

  auto scale = [&](const Vec& a, const Vec& b, int i) {
    return opt.atol + opt.rtol * std::max(std::abs(a(i)), std::abs(b(i)));
  };
  double h = opt.h0;
  if (h <= 0) {
    double d0 = 0, d1 = 0;
    for (int i = 0; i < n; ++i) {
      double sc = opt.atol + opt.rtol * std::abs(y(i));
      d0 = std::max(d0, std::abs(y(i)) / sc);
      d1 = std::max(d1, std::abs(k1(i)) / sc);
    }
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h = std::min(h, std::abs(span));
  }
  const double hmin = opt.hmin * std::max(1.0, std::abs(span));
  double t = t0;
  long steps = 0;
  while (true) {
    double target = stops[next_stop];
    double remaining = (target - t) * dir;
    if (remaining <= 0) {
      if (++next_stop == stops.size()) break;
      continue;
    }
    bool lands = false;
    if (h >= remaining) {
      h = remaining;
      lands = true;
    }
    if (++steps > opt.max_steps) fail(ErrorKind::numerical, "integrate_ode: step budget exhausted");
    double hs = h * dir;
    ytmp = y + hs * (a21 * k1);
    f(t + c2 * hs, ytmp, k2);
    ytmp = y + hs * (a31 * k1 + a32 * k2);
    f(t + c3 * hs, ytmp, k3);
    ytmp = y + hs * (a41 * k1 + a42 * k2 + a43 * k3);
    f(t + c4 * hs, ytmp, k4);
    ytmp = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    f(t + c5 * hs, ytmp, k5);
    ytmp = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    f(t + hs, ytmp, k6);
    ynew = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    f(t + hs, ynew, k7);
    err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double en = 0;
    for (int i = 0; i < n; ++i) {
      double q = err(i) / scale(y, ynew, i);
      en += q * q;
    }
    en = n ? std::sqrt(en / n) : 0.0;
    if (!std::isfinite(en)) en = 1e10;
    if (en <= 1.0) {
      t = lands ? target : t + hs;
      y = ynew;
      k1 = k7;
      sol.t.push_back(t);
      sol.y.push_back(y);
      sol.dy.push_back(k1);
      double fac = en == 0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
      h *= fac;
    } else {
      ++sol.rejected;
      h *= std::clamp(0.9 * std::pow(en, -0.2), 0.1, 0.9);
      if (h < hmin) {
        std::ostringstream os;
        os << "integrate_ode: step size underflow at t=" << t << " (h=" << h << "); the problem may be stiff";
        fail(ErrorKind::numerical, os.str());
      }
    }
  }
  return sol;
}

namespace {

constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.0};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b;
  Mat value;
  double err;
  bool operator<(const Segment& o) const { return err < o.err; }
};

Segment gk15(const MatFn& g, double a, double b, int& evals) {
  double c = 0.5 * (a + b), hl = 0.5 * (b - a);
  Mat fc = g(c);
  Mat k = kWgk[7] * fc;
  Mat gs = kWg[3] * fc;
  for (int j = 0; j < 7; ++j) {
    double dx = hl * kXgk[j];
    Mat s = g(c - dx) + g(c + dx);
    k += kWgk[j] * s;
    if (j % 2 == 1) gs += kWg[j / 2] * s;
  }
  evals += 15;
  k *= hl;
  gs *= hl;
  Segment seg{a, b, k, (k - gs).cwiseAbs().maxCoeff()};
  if (!k.allFinite()) fail(ErrorKind::numerical, "quadrature: integrand produced non-finite values");
  return seg;
}

}  // namespace

Mat integrate(const MatFn& g, double a, double b, double rtol, double atol, QuadratureReport* rep) {
  int evals = 0;
  std::priority_queue<Segment> heap;
  heap.push(gk15(g, a, b, evals));
  Mat total = heap.top().value;
  double err = heap.top().err;
  const int max_segments = 4000;
  int segments = 1;
  while (true) {
    double tol = std::max(atol, rtol * total.cwiseAbs().maxCoeff());
    if (err <= tol) {
      if (rep) {
        rep->evaluations += evals;
        rep->error_estimate += err;
      }
      return total;
    }
    if (segments >= max_segments) {
      std::ostringstream os;
      os << "quadrature: no convergence on [" << a << "," << b << "] after " << evals
         << " evaluations (error estimate " << err << ", tolerance " << tol << ")";
      fail(ErrorKind::numerical, os.str());
    }
    Segment worst = heap.top();
    heap.pop();
    double mid = 0.5 * (worst.a + worst.b);
    Segment left = gk15(g, worst.a, mid, evals), right = gk15(g, mid, worst.b, evals);
    total += left.value + right.value - worst.value;
    err += left.err + right.err - worst.err;
    heap.push(std::move(left));
    heap.push(std::move(right));
    ++segments;
  }
}

Mat integrate_to_infinity(const MatFn& g, double rtol, double tail_tol, QuadratureReport* rep) {
  QuadratureReport local;
  QuadratureReport& r = rep ? *rep : local;
  double a = 0, w = 1;
  Mat total;
  int quiet = 0;
  const int max_panels = 500;
  for (int p = 0; p < max_panels; ++p) {
    Mat part = integrate(g, a, a + w, rtol, 0.1 * tail_tol, &r);
    total = p == 0 ? part : Mat(total + part);
    ++r.panels;
    a += w;
    double pn = part.cwiseAbs().maxCoeff();
    double gn = g(a).cwiseAbs().maxCoeff();
    ++r.evaluations;
    if (pn <= tail_tol * std::max(1.0, total.cwiseAbs().maxCoeff()) && gn <= tail_tol) {
      if (++quiet >= 2) {
        r.truncated_at = a;
        return total;
      }
    } else {
      quiet = 0;
    }
    w = std::min(w * 1.5, 16.0);
  }
  std::ostringstream os;
  os << "quadrature: integrand did not decay below " << tail_tol << " by s=" << a << " (" << r.evaluations
     << " evaluations)";
  fail(ErrorKind::numerical, os.str());
}

double integrate_to_infinity(const std::function<double(double)>& g, double rtol, double tail_tol) {
  MatFn gm = [&](double s) { return Mat::Constant(1, 1, g(s)); };
  return integrate_to_infinity(gm, rtol, tail_tol)(0, 0);
}

void CompensatedSum::add(double x) {
  double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x))
    c_ += (sum_ - t) + x;
  else
    c_ += (x - t) + sum_;
  sum_ = t;
}

}  // namespace typetree::numerics
