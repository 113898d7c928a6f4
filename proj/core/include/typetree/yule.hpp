#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "typetree/numerics.hpp"
#include "typetree/tree.hpp"

namespace typetree {

/// Constant rates for one time segment. birth[i][pair_index(j1,j2)], mutation[i][j] (diagonal ignored).
struct YuleRates {
  std::vector<std::vector<double>> birth;
  std::vector<std::vector<double>> mutation;

  double birth_total(int i) const;     // r_i
  double mutation_total(int i) const;
  double total(int i) const { return birth_total(i) + mutation_total(i); }  // q_i
};

/// Piecewise-constant rate schedule; segment s covers [breakpoints[s-1], breakpoints[s]).
struct YuleParams {
  int k = 1;
  std::vector<double> breakpoints;
  std::vector<YuleRates> segments;

  static YuleParams constant(int k, YuleRates rates);
  static YuleParams single_type(double r);
  /// Symmetric cladogenetic change: types flip independently at births with probability p.
  static YuleParams cladogenetic(double r, double p);
  /// Symmetric anagenetic change: no type change at births, mutation rate r p.
  static YuleParams anagenetic(double r, double p);
  /// Asymmetric variants; their leaf-growth matrix is reducible.
  static YuleParams asymmetric_cladogenetic(double r, double p);
  static YuleParams asymmetric_anagenetic(double r, double p);

  void validate() const;
  int segment_at(double t) const;
  const YuleRates& at(double t) const { return segments[segment_at(t)]; }
  const YuleRates& limit() const { return segments.back(); }
};

struct YuleStop {
  std::optional<double> time;
  std::optional<long> leaves;
};

/// Gillespie simulation, exact segment by segment. initial_type is 1-based.
TypedTree simulate_yule(const YuleParams& yp, const YuleStop& stop, int initial_type, Rng& rng,
                        long max_lineages = 1000000);
TypedTree simulate_yule(const YuleParams& yp, const YuleStop& stop, int initial_type, std::uint64_t seed);

/// Moment matrices at a given rate set; all orders generic_lex.
struct MomentMatrices {
  numerics::Mat B;                    // k x k, leaf means
  std::vector<numerics::Mat> A;       // per branch type l, m x m
  std::vector<numerics::Vec> q;       // q_(l), length m
  numerics::Mat C;                    // k^2 x k^2, pendants
  numerics::Mat U;                    // k^2 x (k m)
  /// Full linear system for (nu, mu, gamma).
  numerics::Mat system() const;
};

MomentMatrices build_moment_matrices(const YuleRates& rates, int k);
MomentMatrices build_moment_matrices(const YuleParams& yp, double t);

struct YuleMoments {
  double t = 0;
  numerics::Vec nu;     // leaf means
  double rho = 0;       // total
  numerics::Vec mu;     // cherry means, l-major generic order
  numerics::Vec gamma;  // pendant means, l*k + m
  double max_residual = 0;  // integral-form residual over the grid (ODE path only)
};

enum class YuleMethod { ode, matrix_exp };

/// Means at time t from a single type-`initial_type` lineage.
YuleMoments yule_moments(const YuleParams& yp, double t, int initial_type = 1, YuleMethod method = YuleMethod::ode);

/// ODE path evaluated on a grid of times (ascending); residuals checked per interval.
std::vector<YuleMoments> yule_moments_grid(const YuleParams& yp, const std::vector<double>& times,
                                           int initial_type = 1);

struct YuleLimits {
  double lambda = 0;
  numerics::Vec u;      // right Perron vector of B, sums to 1
  std::vector<numerics::Vec> w;  // per branch type
  numerics::Vec w_star;  // l*k + m
  double identity_residual = 0;  // |2 sum w + sum w* - 1|
};

/// Limiting cherry and pendant fractions from the final segment's rates.
YuleLimits limit_fractions(const YuleParams& yp);

/// Off-diagonal support of B is strongly connected.
bool irreducible(const numerics::Mat& B);

/// Time at which rho reaches the target under constant (final-segment) rates, by bisection on rho(t).
double time_for_mean_leaves(const YuleParams& yp, double target, int initial_type = 1);

}  // namespace typetree
