#include <benchmark/benchmark.h>

#include "nlirf/diagnostics.hpp"
#include "nlirf/identified_set.hpp"
#include "nlirf/irf.hpp"
#include "nlirf/model.hpp"

using namespace nlirf;

static void BM_SimulateDar(benchmark::State& state) {
  const auto m = ModelSpec::dar1(0.5, 1.0, 0.5);
  for (auto _ : state) {
    auto traj = simulate_path(m, Vector::Zero(1), static_cast<std::size_t>(state.range(0)), 1);
    benchmark::DoNotOptimize(traj.states.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateDar)->Arg(1000)->Arg(100000);

static void BM_EirfDar(benchmark::State& state) {
  const auto m = ModelSpec::dar1(0.5, 1.0, 0.5);
  const ShockSpec shock{ShockKind::kInnovation, Vector::Constant(1, 1.0), 20};
  McOptions mc;
  mc.replicates = static_cast<std::size_t>(state.range(0));
  mc.seed = 3;
  for (auto _ : state) {
    auto r = eirf(m, Vector::Constant(1, 0.5), shock, mc);
    benchmark::DoNotOptimize(r.per_horizon.data());
  }
}
BENCHMARK(BM_EirfDar)->Arg(1000)->Arg(10000);

static void BM_SkewExp(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Matrix a = Matrix::Random(n, n);
  const Matrix b = a - a.transpose();
  for (auto _ : state) {
    Matrix q = skew_exp(b);
    benchmark::DoNotOptimize(q.data());
  }
}
BENCHMARK(BM_SkewExp)->Arg(2)->Arg(3)->Arg(8);

static void BM_MarkovTest(benchmark::State& state) {
  const auto m = ModelSpec::dar1(0.5, 1.0, 0.3);
  const auto traj = simulate_path(m, Vector::Zero(1), static_cast<std::size_t>(state.range(0)), 5);
  MarkovOptions opts;
  opts.resamples = 99;
  for (auto _ : state) {
    auto rep = markov_test(traj.states, default_markov_dictionary(), opts);
    benchmark::DoNotOptimize(rep.statistic);
  }
}
BENCHMARK(BM_MarkovTest)->Arg(1000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
