#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace typetree::numerics {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

struct EigenResult {
  Eigen::VectorXcd values;  // sorted by descending real part
  Eigen::MatrixXcd right;   // columns
  Eigen::MatrixXcd left;    // columns, w^T M = lambda w^T, scaled so w . v = 1
  bool left_valid = false;
  bool metzler = false;     // nonnegative off-diagonal entries
  double max_residual = 0;  // worst ||Mv - lambda v||_inf over right pairs
};

EigenResult eigen_decompose(const Mat& M);

struct PerronPair {
  double lambda = 0;
  Vec u;  // right, entries sum to 1
  Vec v;  // left, v . u = 1
  bool by_power_iteration = false;
};

/// Dominant real eigenpair of a Metzler matrix (power iteration on a shift,
/// dense solver as fallback). The matrix should be irreducible.
PerronPair perron(const Mat& M);

/// Partial-pivot LU solve with a residual contract; singular systems throw
/// a numerical error that reports the rank.
Vec solve_linear(const Mat& M, const Vec& b);

struct LeastSquaresResult {
  Vec x;             // minimum-norm solution
  int rank = 0;
  double residual = 0;  // ||Mx - b||_2
  Mat null_space;    // columns span ker(M)
};
LeastSquaresResult least_squares(const Mat& M, const Vec& b, double rank_tol = 1e-10);

Mat matrix_exp(const Mat& M);

/// Gamma(n - 1 + a) / Gamma(n), accurate for large n.
double gamma_ratio(double a, double n);

/// Dense output of an ODE integration; cubic Hermite between accepted steps.
class DenseSolution {
 public:
  std::vector<double> t;
  std::vector<Vec> y;
  std::vector<Vec> dy;
  int rejected = 0;

  Vec operator()(double time) const;
  const Vec& back() const { return y.back(); }
};

using OdeRhs = std::function<void(double, const Vec&, Vec&)>;

struct OdeOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
  double h0 = 0;                // 0 picks an initial step automatically
  double hmin = 1e-13;          // relative to the span
  long max_steps = 2000000;
  std::vector<double> stops;    // times the stepper must land on exactly
};

/// Dormand-Prince 5(4) with step control. t1 may be smaller than t0.
DenseSolution integrate_ode(const OdeRhs& f, const Vec& y0, double t0, double t1, const OdeOptions& opt = {});

struct QuadratureReport {
  int evaluations = 0;
  int panels = 0;
  double truncated_at = 0;
  double error_estimate = 0;
};

using MatFn = std::function<Mat(double)>;

/// Adaptive Gauss-Kronrod (7/15) on [a,b] for matrix-valued integrands.
Mat integrate(const MatFn& g, double a, double b, double rtol, double atol, QuadratureReport* rep = nullptr);

/// Integral over [0, inf): adaptive panels of growing width until both the
/// panel contribution and the integrand fall below tail_tol.
Mat integrate_to_infinity(const MatFn& g, double rtol = 1e-7, double tail_tol = 1e-12,
                          QuadratureReport* rep = nullptr);

double integrate_to_infinity(const std::function<double(double)>& g, double rtol = 1e-7, double tail_tol = 1e-12);

/// Kahan-Babuska summation.
class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + c_; }

 private:
  double sum_ = 0, c_ = 0;
};

}  // namespace typetree::numerics
