#pragma once

#include <cstdint>
#include <vector>

#include "typetree/numerics.hpp"
#include "typetree/tree.hpp"

namespace typetree {

/// Multi-type birth-death rates; b[i][j] is the rate at which a type-i lineage
/// gives birth to a type-j offspring, d[i] the death rate. Types 0-based here.
struct BdParams {
  int k = 1;
  std::vector<std::vector<double>> b;
  std::vector<double> d;

  static BdParams single_type(double birth, double death);
  void validate() const;
  double total_birth(int i) const;
};

struct PopulationPoint {
  double time = 0;
  std::vector<long> counts;
};

struct BdOptions {
  long max_lineages = 1000000;
  bool record_trajectory = true;
};

struct BdSimulation {
  TypedTree tree;  // full tree, extinct leaves marked
  std::vector<PopulationPoint> trajectory;
};

/// Gillespie simulation on [0, T]. initial_type is 1-based.
BdSimulation simulate_bd(const BdParams& bd, double T, int initial_type, Rng& rng, const BdOptions& opt = {});
BdSimulation simulate_bd(const BdParams& bd, double T, int initial_type, std::uint64_t seed,
                         const BdOptions& opt = {});

/// Keep only lineages with an extant descendant at T. Empty tree when nothing survives.
TypedTree prune_to_ancestral(const TypedTree& full, double T);

struct ExtinctionOptions {
  int grid_points = 201;
  double rtol = 1e-9;
  double atol = 1e-12;
};

/// p[i][m] = P(no descendants at T | one type-i lineage at times[m]).
struct ExtinctionTable {
  int k = 1;
  double T = 0;
  std::vector<double> times;  // ascending, last is T
  std::vector<std::vector<double>> p;
  numerics::DenseSolution solution;  // in s = T - t
  double max_residual = 0;           // integral-form residual over grid intervals

  numerics::Vec at(double t) const;
};

ExtinctionTable extinction_probabilities(const BdParams& bd, double T, const ExtinctionOptions& opt = {});

/// Closed form for one type: d(1 - e^{-(b-d)s}) / (b - d e^{-(b-d)s}), s = T - t.
double extinction_single_type(double b, double d, double s);

/// Rates of the reconstructed process at time t; all matrices k x k, 0-based.
struct AncestralRates {
  double t = 0;
  numerics::Mat birth;     // q_i^{ij}
  numerics::Mat mutation;  // q_i^j, zero diagonal
  numerics::Vec total;     // q_i
  numerics::Vec weight;    // a_i = q_i / sum q
  numerics::Mat split_birth;
  numerics::Mat split_mutation;
};

AncestralRates ancestral_rates(const BdParams& bd, const ExtinctionTable& table, double t);

/// Time-inhomogeneous pure birth with mutation, conditioned on survival to T,
/// simulated by thinning.
TypedTree simulate_reconstructed(const BdParams& bd, const ExtinctionTable& table, int initial_type, Rng& rng,
                                 long max_lineages = 1000000);
TypedTree simulate_reconstructed(const BdParams& bd, double T, int initial_type, std::uint64_t seed);

}  // namespace typetree
