#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "typetree/census.hpp"
#include "typetree/erm.hpp"
#include "typetree/numerics.hpp"
#include "typetree/yule.hpp"

namespace typetree {

struct ErmEstimate {
  ErmParams params;
  std::array<double, 2> block_totals{};  // type-1 and type-2 rooted cherries
};

/// Cherry counts or fractions in paper_k2 order (6 entries; a 10-vector is accepted, pendants ignored).
ErmEstimate infer_erm(const std::vector<double>& cherries);
ErmEstimate infer_erm(const Census& census);

enum class Solvability { solvable, not_solvable, boundary };
const char* to_string(Solvability s);

struct SolvabilityReport {
  Solvability status = Solvability::not_solvable;
  double value = 0;  // |sqrt(x1/S1) + sqrt(x4/S2) - 1|
  double threshold = 0;
};

/// Root-state reconstruction criterion for Markov-propagation ERM fractions (paper_k2 order).
SolvabilityReport reconstruction_solvable(const std::vector<double>& fractions, double band = 1e-9);

struct YuleEstimate {
  YuleRates rates;
  double lambda = 0;
  std::vector<double> u;          // recomputed leaf-type fractions
  int stage1_rank = 0;
  double stage1_residual = 0;
  double stage2_residual = 0;     // max_l |sum q_(l) - r_l|
  std::vector<std::string> warnings;
};

/// Limiting rates from limiting fractions. w: per branch type (generic pair order);
/// w_star: l*k + m; r: per-type total birth rates. lambda defaults to the common r when all r agree.
YuleEstimate infer_yule(const std::vector<numerics::Vec>& w, const numerics::Vec& w_star, const std::vector<double>& r,
                        std::optional<double> lambda = std::nullopt);

struct PEstimate {
  double p = 0;
  std::vector<double> estimates;  // the individual estimators
  double spread = 0;              // max pairwise difference
  bool tie = false;               // cladogenetic root choice was ambiguous
  std::array<double, 2> roots{};  // cladogenetic: both roots of the quadratic
};

/// Symmetric cladogenetic model; w1 = (w1^11, w1^12, w1^22).
PEstimate estimate_p_cladogenetic(const std::array<double, 3>& w1);

/// Symmetric anagenetic model; w1, w2 per branch type, w_star = (w1^1, w1^2, w2^1, w2^2).
PEstimate estimate_p_anagenetic(const std::array<double, 3>& w1, const std::array<double, 3>& w2,
                                const std::array<double, 4>& w_star);

/// Probabilities p_l^{j1j2} and weight a1 of a mutation-free two-type model.
struct SplitModel {
  std::array<double, 3> p1{}, p2{};
  double a1 = 0.5;

  static SplitModel from_rates(const YuleRates& rates);
  YuleRates to_rates(double total = 1.0) const;
  /// (p1^11 - p1^22) - 1 - (p2^11 - p2^22); zero when the comparison applies.
  double condition_gap() const;
};

/// Closed-form limiting cherry fractions; rows l = 1, 2, columns (11, 12, 22).
std::array<std::array<double, 3>, 2> comparison_fractions(const SplitModel& m);

struct ComparisonReport {
  double a1 = 0, a1_prime = 0;
  std::array<std::array<double, 3>, 2> w{}, w_prime{};
  /// sign(w' - w) per entry: +1, 0, -1
  std::array<std::array<int, 3>, 2> direction{};
  bool matches_claim = false;  // orderings agree with the monotonicity statement
};

ComparisonReport compare_models(const YuleParams& a, const YuleParams& b, double tol = 1e-9);

}  // namespace typetree
