#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "typetree/census.hpp"
#include "typetree/index_order.hpp"
#include "typetree/numerics.hpp"
#include "typetree/tree.hpp"

namespace typetree {

/// Split probabilities q[i][pair_index(j1,j2)]; types 0-based internally.
struct ErmParams {
  int k = 1;
  std::vector<std::vector<double>> q;

  static ErmParams single_type();
  /// Rows given as (q^11, q^12, q^22).
  static ErmParams k2(std::array<double, 3> q1, std::array<double, 3> q2);

  double prob(int i, int j1, int j2) const { return q[i][pair_index(k, j1, j2)]; }
  void validate() const;
  /// Some type always reproduces itself (q_i^{ii} = 1).
  bool has_absorbing_type() const;

  // k = 2 constants
  double c1() const;
  double c2() const;
  double c1p() const;
  double c2p() const;
};

/// Grow a tree leaf by leaf until it has n leaves. initial_type is 1-based.
TypedTree simulate_erm(const ErmParams& params, long n, int initial_type, Rng& rng);
TypedTree simulate_erm(const ErmParams& params, long n, int initial_type, std::uint64_t seed);

/// Census of a freshly grown tree without materializing the tree.
Census simulate_erm_census(const ErmParams& params, long n, int initial_type, Rng& rng);

/// One possible effect of drawing a ball: probability and sparse count change.
struct UrnOutcome {
  double prob = 0;
  std::vector<std::pair<int, int>> delta;  // (ball index, change)
};

/// Cherry/pendant urn: balls are cherry types (weight 2) and pendant types (weight 1).
class UrnModel {
 public:
  explicit UrnModel(const ErmParams& params);
  UrnModel(const ErmParams& params, Ordering ordering);

  int size() const { return static_cast<int>(weights_.size()); }
  const IndexOrder& order() const { return order_; }
  const ErmParams& params() const { return params_; }
  bool is_cherry(int ball) const { return ball < order_.num_cherries(); }
  double weight(int ball) const { return weights_[ball]; }
  numerics::Vec weights() const;
  const std::vector<UrnOutcome>& outcomes(int ball) const { return outcomes_[ball]; }

  numerics::Vec mean_replacement(int ball) const;
  numerics::Mat second_moment(int ball) const;
  /// A[:, j] = a_j E[xi_j].
  numerics::Mat generating_matrix() const;

  /// Balls present right after a single leaf of this (1-based) type splits.
  std::vector<int> initial_balls(int initial_type) const;
  /// Balls reachable from the given set through positive-probability draws.
  std::vector<int> reachable_from(const std::vector<int>& start) const;
  /// Whether every ball type can eventually produce every other one.
  bool irreducible() const;
  /// Strongly connected components, in some topological order.
  std::vector<std::vector<int>> components(const std::vector<int>& subset) const;
  std::vector<std::vector<int>> successors() const;

 private:
  ErmParams params_;
  IndexOrder order_;
  std::vector<double> weights_;
  std::vector<std::vector<UrnOutcome>> outcomes_;
};

struct UrnState {
  std::vector<long long> counts;
  long long steps = 0;
  long long leaves(const UrnModel& model) const;
};

struct UrnTrajectory {
  UrnState final_state;
  std::vector<UrnState> snapshots;
};

/// State after the first split of a single leaf (the urn starts at two leaves).
UrnState initial_urn_from_leaf(const UrnModel& model, int initial_type, Rng& rng);

/// Draw `steps` balls; snapshots every `snapshot_every` steps when nonzero.
UrnTrajectory simulate_urn(const UrnModel& model, const UrnState& initial, long long steps, Rng& rng,
                           long long snapshot_every = 0);
UrnTrajectory simulate_urn(const UrnModel& model, const UrnState& initial, long long steps, std::uint64_t seed,
                           long long snapshot_every = 0);

}  // namespace typetree
