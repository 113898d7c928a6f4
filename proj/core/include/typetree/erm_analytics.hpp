#pragma once

#include <vector>

#include "typetree/erm.hpp"
#include "typetree/numerics.hpp"

namespace typetree {

enum class MomentMethod { automatic, closed_form, recurrence };
const char* to_string(MomentMethod m);

/// Condition for the closed-form means: c1 - c2 away from -2 and 2 (k = 2).
bool star_condition(const ErmParams& params, double tol = 1e-9);

/// Expected leaf counts per type after n leaves. initial_type is 1-based.
std::vector<double> mean_leaves(const ErmParams& params, long n, int initial_type,
                                MomentMethod method = MomentMethod::automatic);

/// Expected cherry counts in the default cherry order (paper_k2 for k = 2).
std::vector<double> mean_cherries(const ErmParams& params, long n, int initial_type,
                                  MomentMethod method = MomentMethod::automatic);

/// Exact cherry variances (k = 2), from the joint moment recurrence.
std::vector<double> var_cherries(const ErmParams& params, long n, int initial_type);

struct MomentReport {
  long n = 0;
  std::vector<double> nu;
  std::vector<double> mu;
  std::vector<double> sigma2;
  MomentMethod method = MomentMethod::recurrence;
  /// c1 - c2 outside {-2,-1,0,1,3/2,2}, where the variance growth orders are known.
  bool asymptotics_apply = false;
};

MomentReport moment_report(const ErmParams& params, long n, int initial_type,
                           MomentMethod method = MomentMethod::automatic);

struct UrnSpec {
  IndexOrder order = IndexOrder::generic(1);
  numerics::Vec a;
  numerics::Mat A;
  Eigen::VectorXcd eigenvalues;  // descending real part
  numerics::Vec v1, u1;          // a . v1 = 1, u1 . v1 = 1
  double lambda2 = 0;
  bool lambda2_simple = false;   // v2/u2 are filled only when true
  numerics::Vec v2, u2;          // u2 . v2 = 1
  double eigen_residual = 0;
};

UrnSpec urn_matrix(const ErmParams& params);

struct LimitFractions {
  numerics::Vec v1;               // full length, zero off the support
  std::vector<int> support;       // recurrent ball types
  bool restricted = false;        // support is a strict subset
  bool closed_form_checked = false;
  double closed_form_discrepancy = 0;
};

/// Almost-sure limit of ball counts over leaf count.
LimitFractions limit_fractions_erm(const ErmParams& params, int initial_type = 1);

/// Closed-form limit vector for k = 2 (paper_k2 order).
numerics::Vec limit_fractions_closed_form(const ErmParams& params);

/// B = sum_i v1_i a_i E[xi_i xi_i^T].
numerics::Mat urn_b_matrix(const UrnModel& model, const numerics::Vec& v1);

/// Covariance of (X_n - n v1)/sqrt(n ln n) when c1 - c2 = 3/2.
numerics::Mat clt_covariance_critical(const ErmParams& params);

/// Constant C of the critical cherry block, Sigma[l][m] = C * p_l * p_m.
double clt_critical_constant(const ErmParams& params);

struct SubcriticalCovariance {
  numerics::Mat sigma;  // full size, zero off the support
  std::vector<int> support;
  numerics::QuadratureReport quadrature;
};

/// Covariance of (X_n - n v1)/sqrt(n) when Re(lambda2) < 1/2 on the recurrent classes.
SubcriticalCovariance clt_covariance_subcritical(const ErmParams& params, int initial_type = 1);

}  // namespace typetree
