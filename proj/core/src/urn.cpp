#include <algorithm>
#include <functional>
#include <map>

#include "typetree/erm.hpp"
#include "typetree/error.hpp"

namespace typetree {

namespace {
void add_outcome(std::vector<UrnOutcome>& out, double prob, std::map<int, int> delta) {
  if (prob <= 0) return;
  UrnOutcome o;
  o.prob = prob;
  for (auto [i, d] : delta)
    if (d != 0) o.delta.push_back({i, d});
  // merge with an identical outcome if one exists
  for (auto& e : out)
    if (e.delta == o.delta) {
      e.prob += prob;
      return;
    }
  out.push_back(std::move(o));
}
}  // namespace

UrnModel::UrnModel(const ErmParams& params) : UrnModel(params, default_ordering(params.k)) {}

UrnModel::UrnModel(const ErmParams& params, Ordering ordering)
    : params_(params), order_(IndexOrder::make(params.k, ordering)) {
  params_.validate();
  const int k = params_.k, m = num_pairs(k);
  const int nc = order_.num_cherries(), np = order_.num_pendants();
  weights_.assign(nc, 2.0);
  weights_.insert(weights_.end(), np, 1.0);
  outcomes_.resize(nc + np);

  for (int ball = 0; ball < nc; ++ball) {
    auto [l, j1, j2] = order_.cherry_at(ball);
    // the drawn leaf is either child with probability 1/2
    std::array<std::array<int, 2>, 2> picks{{{j1, j2}, {j2, j1}}};
    for (auto [t, sib] : picks)
      for (int c = 0; c < m; ++c) {
        auto [c1, c2] = pair_at(k, c);
        std::map<int, int> d;
        d[ball] -= 1;
        d[nc + order_.pendant_index(l, sib)] += 1;
        d[order_.cherry_index(t, c1, c2)] += 1;
        add_outcome(outcomes_[ball], 0.5 * params_.q[t][c], d);
      }
  }
  for (int p = 0; p < np; ++p) {
    int ball = nc + p;
    auto [l, leaf] = order_.pendant_at(p);
    for (int c = 0; c < m; ++c) {
      auto [c1, c2] = pair_at(k, c);
      std::map<int, int> d;
      d[ball] -= 1;
      d[order_.cherry_index(leaf, c1, c2)] += 1;
      add_outcome(outcomes_[ball], params_.q[leaf][c], d);
    }
  }
}

numerics::Vec UrnModel::weights() const {
  return Eigen::Map<const numerics::Vec>(weights_.data(), static_cast<Eigen::Index>(weights_.size()));
}

numerics::Vec UrnModel::mean_replacement(int ball) const {
  numerics::Vec v = numerics::Vec::Zero(size());
  for (const auto& o : outcomes_[ball])
    for (auto [i, d] : o.delta) v(i) += o.prob * d;
  return v;
}

numerics::Mat UrnModel::second_moment(int ball) const {
  numerics::Mat M = numerics::Mat::Zero(size(), size());
  for (const auto& o : outcomes_[ball])
    for (auto [i, di] : o.delta)
      for (auto [j, dj] : o.delta) M(i, j) += o.prob * di * dj;
  return M;
}

numerics::Mat UrnModel::generating_matrix() const {
  numerics::Mat A(size(), size());
  for (int j = 0; j < size(); ++j) A.col(j) = weights_[j] * mean_replacement(j);
  return A;
}

std::vector<int> UrnModel::initial_balls(int initial_type) const {
  if (initial_type < 1 || initial_type > params_.k) fail(ErrorKind::parameter, "initial type out of range");
  std::vector<int> out;
  int t = initial_type - 1;
  for (int c = 0; c < num_pairs(params_.k); ++c)
    if (params_.q[t][c] > 0) {
      auto [a, b] = pair_at(params_.k, c);
      out.push_back(order_.cherry_index(t, a, b));
    }
  return out;
}

std::vector<std::vector<int>> UrnModel::successors() const {
  std::vector<std::vector<int>> succ(size());
  for (int b = 0; b < size(); ++b) {
    for (const auto& o : outcomes_[b])
      for (auto [i, d] : o.delta)
        if (d > 0) succ[b].push_back(i);
    std::sort(succ[b].begin(), succ[b].end());
    succ[b].erase(std::unique(succ[b].begin(), succ[b].end()), succ[b].end());
  }
  return succ;
}

std::vector<int> UrnModel::reachable_from(const std::vector<int>& start) const {
  auto succ = successors();
  std::vector<char> seen(size(), 0);
  std::vector<int> stack(start.begin(), start.end());
  for (int s : start) seen[s] = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int w : succ[v])
      if (!seen[w]) {
        seen[w] = 1;
        stack.push_back(w);
      }
  }
  std::vector<int> out;
  for (int i = 0; i < size(); ++i)
    if (seen[i]) out.push_back(i);
  return out;
}

std::vector<std::vector<int>> UrnModel::components(const std::vector<int>& subset) const {
  // Tarjan restricted to `subset`
  auto succ = successors();
  std::vector<char> in(size(), 0);
  for (int s : subset) in[s] = 1;
  std::vector<int> index(size(), -1), low(size(), 0);
  std::vector<char> on(size(), 0);
  std::vector<int> stack;
  std::vector<std::vector<int>> comps;
  int counter = 0;
  std::function<void(int)> visit = [&](int v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on[v] = 1;
    for (int w : succ[v]) {
      if (!in[w]) continue;
      if (index[w] < 0) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<int> comp;
      int w;
      do {
        w = stack.back();
        stack.pop_back();
        on[w] = 0;
        comp.push_back(w);
      } while (w != v);
      std::sort(comp.begin(), comp.end());
      comps.push_back(std::move(comp));
    }
  };
  for (int s : subset)
    if (index[s] < 0) visit(s);
  return comps;
}

bool UrnModel::irreducible() const {
  std::vector<int> all(size());
  for (int i = 0; i < size(); ++i) all[i] = i;
  return components(all).size() == 1;
}

long long UrnState::leaves(const UrnModel& model) const {
  long long s = 0;
  for (int i = 0; i < model.size(); ++i) s += static_cast<long long>(model.weight(i)) * counts[i];
  return s;
}

UrnState initial_urn_from_leaf(const UrnModel& model, int initial_type, Rng& rng) {
  const auto& p = model.params();
  if (initial_type < 1 || initial_type > p.k) fail(ErrorKind::parameter, "initial type out of range");
  UrnState s;
  s.counts.assign(model.size(), 0);
  int t = initial_type - 1;
  double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  int m = num_pairs(p.k), c = -1;
  double acc = 0;
  for (int j = 0; j < m; ++j) {
    if (p.q[t][j] <= 0) continue;
    c = j;  // last positive entry absorbs rounding
    acc += p.q[t][j];
    if (u < acc) break;
  }
  auto [a, b] = pair_at(p.k, c);
  s.counts[model.order().cherry_index(t, a, b)] = 1;
  return s;
}

UrnTrajectory simulate_urn(const UrnModel& model, const UrnState& initial, long long steps, Rng& rng,
                           long long snapshot_every) {
  const int d = model.size();
  if (static_cast<int>(initial.counts.size()) != d) fail(ErrorKind::state, "initial state has wrong dimension");
  UrnTrajectory out;
  UrnState s = initial;
  std::vector<long long> w(d);
  for (int i = 0; i < d; ++i) w[i] = static_cast<long long>(model.weight(i));
  long long total = s.leaves(model);
  // cumulative outcome tables
  std::vector<std::vector<double>> cum(d);
  for (int i = 0; i < d; ++i) {
    double acc = 0;
    for (const auto& o : model.outcomes(i)) cum[i].push_back(acc += o.prob);
    if (!cum[i].empty()) cum[i].back() = 2.0;
  }
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (long long step = 0; step < steps; ++step) {
    if (total <= 0) fail(ErrorKind::state, "urn is empty");
    long long r = std::uniform_int_distribution<long long>(0, total - 1)(rng);
    int ball = 0;
    for (; ball < d; ++ball) {
      long long mass = w[ball] * s.counts[ball];
      if (r < mass) break;
      r -= mass;
    }
    const auto& outs = model.outcomes(ball);
    double u = unif(rng);
    std::size_t j = 0;
    while (u >= cum[ball][j]) ++j;
    for (auto [i, dd] : outs[j].delta) {
      s.counts[i] += dd;
      total += w[i] * dd;
    }
    ++s.steps;
    if (snapshot_every > 0 && s.steps % snapshot_every == 0) out.snapshots.push_back(s);
  }
  out.final_state = std::move(s);
  return out;
}

UrnTrajectory simulate_urn(const UrnModel& model, const UrnState& initial, long long steps, std::uint64_t seed,
                           long long snapshot_every) {
  Rng rng = make_rng(seed);
  return simulate_urn(model, initial, steps, rng, snapshot_every);
}

}  // namespace typetree
