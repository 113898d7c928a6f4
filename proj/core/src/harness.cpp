#include "typetree/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <limits>
#include <mutex>
#include <thread>

#include "typetree/error.hpp"
#include "typetree/numerics.hpp"

namespace typetree {

namespace {

constexpr std::size_t kMaxMessages = 5;

struct Raw {
  std::vector<double> values;  // reps x dim, row-major
  std::vector<char> ok;
  std::vector<std::string> messages;
};

Raw collect(const VectorStatistic& stat, std::size_t dim, const ReplicateOptions& opt) {
  if (opt.reps < 1) fail(ErrorKind::parameter, "reps must be >= 1");
  const auto reps = static_cast<std::size_t>(opt.reps);
  Raw raw;
  raw.values.assign(reps * dim, std::numeric_limits<double>::quiet_NaN());
  raw.ok.assign(reps, 0);
  std::vector<std::string> errors(reps);
  std::atomic<long> next{0};

  auto worker = [&] {
    for (;;) {
      long i = next.fetch_add(1);
      if (i >= opt.reps) return;
      try {
        Rng rng = make_rng(opt.base_seed, static_cast<std::uint64_t>(i));
        std::vector<double> v = stat(rng, i);
        if (v.size() != dim) fail(ErrorKind::state, "statistic returned the wrong length");
        std::copy(v.begin(), v.end(), raw.values.begin() + static_cast<std::ptrdiff_t>(i * dim));
        raw.ok[i] = 1;
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  int jobs = std::max(1, opt.jobs);
  jobs = static_cast<int>(std::min<long>(jobs, opt.reps));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (std::size_t i = 0; i < reps && raw.messages.size() < kMaxMessages; ++i)
    if (!raw.ok[i]) raw.messages.push_back("replicate " + std::to_string(i) + ": " + errors[i]);
  return raw;
}

ReplicateSummary summarize(const Raw& raw, std::size_t dim, std::size_t col, const ReplicateOptions& opt) {
  ReplicateSummary s;
  s.reps = opt.reps;
  s.failure_messages = raw.messages;
  numerics::CompensatedSum sum;
  long n = 0;
  for (long i = 0; i < opt.reps; ++i) {
    if (!raw.ok[i]) {
      ++s.failures;
      continue;
    }
    sum.add(raw.values[i * dim + col]);
    ++n;
  }
  if (n > 0) s.mean = sum.value() / static_cast<double>(n);
  if (n > 1) {
    numerics::CompensatedSum ss;
    for (long i = 0; i < opt.reps; ++i)
      if (raw.ok[i]) {
        double d = raw.values[i * dim + col] - s.mean;
        ss.add(d * d);
      }
    s.variance = ss.value() / static_cast<double>(n - 1);
    s.std_error = std::sqrt(s.variance / static_cast<double>(n));
  }
  if (opt.keep_values) {
    s.values.resize(opt.reps);
    for (long i = 0; i < opt.reps; ++i) s.values[i] = raw.values[i * dim + col];
  }
  return s;
}

}  // namespace

ReplicateSummary run_replicates(const ScalarStatistic& stat, const ReplicateOptions& opt) {
  VectorStatistic vs = [&stat](Rng& rng, long i) { return std::vector<double>{stat(rng, i)}; };
  Raw raw = collect(vs, 1, opt);
  return summarize(raw, 1, 0, opt);
}

std::vector<ReplicateSummary> run_replicates(const VectorStatistic& stat, std::size_t dim,
                                             const ReplicateOptions& opt) {
  Raw raw = collect(stat, dim, opt);
  std::vector<ReplicateSummary> out;
  for (std::size_t c = 0; c < dim; ++c) out.push_back(summarize(raw, dim, c, opt));
  return out;
}

void write_replicate_csv(std::ostream& os, const std::vector<std::string>& names,
                         const std::vector<ReplicateSummary>& s) {
  if (names.size() != s.size()) fail(ErrorKind::parameter, "one name per statistic");
  os << "replicate";
  for (const auto& n : names) os << ',' << n;
  os << '\n';
  if (s.empty()) return;
  const std::size_t reps = s.front().values.size();
  auto old = os.precision(17);
  for (std::size_t i = 0; i < reps; ++i) {
    os << i;
    for (const auto& col : s) {
      double v = col.values.at(i);
      os << ',';
      if (std::isnan(v)) os << "NA";
      else os << v;
    }
    os << '\n';
  }
  os.precision(old);
}

}  // namespace typetree
