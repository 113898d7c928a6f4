#include <benchmark/benchmark.h>

#include "typetree/branching.hpp"
#include "typetree/census.hpp"
#include "typetree/erm.hpp"
#include "typetree/erm_analytics.hpp"
#include "typetree/yule.hpp"

using namespace typetree;

static void BM_ErmCensus(benchmark::State& state) {
  auto p = ErmParams::k2({0.5, 0.3, 0.2}, {0.1, 0.4, 0.5});
  Rng rng = make_rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(simulate_erm_census(p, state.range(0), 1, rng));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ErmCensus)->Arg(100)->Arg(10000);

static void BM_UrnSteps(benchmark::State& state) {
  auto p = ErmParams::k2({0.5, 0.3, 0.2}, {0.1, 0.4, 0.5});
  UrnModel model(p);
  Rng rng = make_rng(2);
  for (auto _ : state) {
    auto init = initial_urn_from_leaf(model, 1, rng);
    benchmark::DoNotOptimize(simulate_urn(model, init, state.range(0), rng));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_UrnSteps)->Arg(100000);

static void BM_VarCherries(benchmark::State& state) {
  auto p = ErmParams::k2({0.5, 0.3, 0.2}, {0.1, 0.4, 0.5});
  for (auto _ : state) benchmark::DoNotOptimize(var_cherries(p, state.range(0), 1));
}
BENCHMARK(BM_VarCherries)->Arg(200)->Arg(10000);

static YuleParams yule_fixture() {
  YuleRates r;
  r.birth = {{0.6, 0.3, 0.1}, {0.1, 0.2, 0.5}};
  r.mutation = {{0, 0.2}, {0.3, 0}};
  return YuleParams::constant(2, r);
}

static void BM_YuleMomentsOde(benchmark::State& state) {
  auto yp = yule_fixture();
  for (auto _ : state) benchmark::DoNotOptimize(yule_moments(yp, 5.0, 1, YuleMethod::ode));
}
BENCHMARK(BM_YuleMomentsOde);

static void BM_YuleMomentsExp(benchmark::State& state) {
  auto yp = yule_fixture();
  for (auto _ : state) benchmark::DoNotOptimize(yule_moments(yp, 5.0, 1, YuleMethod::matrix_exp));
}
BENCHMARK(BM_YuleMomentsExp);

static void BM_YuleSimulate(benchmark::State& state) {
  auto yp = yule_fixture();
  std::uint64_t seed = 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(simulate_yule(yp, YuleStop{std::nullopt, state.range(0)}, 1, ++seed));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_YuleSimulate)->Arg(1000);

static void BM_Extinction(benchmark::State& state) {
  BdParams bd;
  bd.k = 2;
  bd.b = {{0.8, 0.3}, {0.2, 0.5}};
  bd.d = {0.6, 0.9};
  for (auto _ : state) benchmark::DoNotOptimize(extinction_probabilities(bd, 10.0));
}
BENCHMARK(BM_Extinction);
BENCHMARK_MAIN();
