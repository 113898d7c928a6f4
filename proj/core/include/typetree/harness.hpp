#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "typetree/tree.hpp"

namespace typetree {

struct ReplicateOptions {
  long reps = 1;
  std::uint64_t base_seed = 0;
  int jobs = 1;
  bool keep_values = false;
};

/// Aggregate of one statistic. Failed replicates are excluded from the moments.
struct ReplicateSummary {
  long reps = 0;
  long failures = 0;
  double mean = 0;
  double variance = 0;                 // unbiased; 0 when fewer than two successes
  std::optional<double> std_error;     // absent with fewer than two successes
  std::vector<double> values;          // per replicate (NaN on failure) when keep_values
  std::vector<std::string> failure_messages;  // first few
};

/// Replicate i draws from make_rng(base_seed, i). Output does not depend on jobs.
using ScalarStatistic = std::function<double(Rng&, long)>;
using VectorStatistic = std::function<std::vector<double>(Rng&, long)>;

ReplicateSummary run_replicates(const ScalarStatistic& stat, const ReplicateOptions& opt);
std::vector<ReplicateSummary> run_replicates(const VectorStatistic& stat, std::size_t dim,
                                             const ReplicateOptions& opt);

/// "replicate,<names...>" then one row per replicate; needs keep_values.
void write_replicate_csv(std::ostream& os, const std::vector<std::string>& names,
                         const std::vector<ReplicateSummary>& summaries);

}  // namespace typetree
