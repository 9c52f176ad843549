#include <benchmark/benchmark.h>

#include "gradsync/experiments.hpp"
#include "gradsync/flow.hpp"
#include "gradsync/noise.hpp"
#include "gradsync/stopping.hpp"

using namespace gradsync;

static void BM_NoiseIncrement(benchmark::State& state) {
  NoisePath path(1, 0, 1e-3, 2);
  double w[2];
  for (auto _ : state) {
    path.next_increment(w);
    benchmark::DoNotOptimize(w);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_NoiseIncrement);

static void BM_SdeStep(benchmark::State& state) {
  const auto p = RadialPotential::quartic();
  auto e = Ensemble::sphere_sample(2, static_cast<std::size_t>(state.range(0)), 1.0, 0.2);
  NoisePath path(1, 0, 1e-3, 2);
  for (auto _ : state) {
    sde_step(p, e, path);
    benchmark::DoNotOptimize(e.coords.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SdeStep)->Arg(1)->Arg(64)->Arg(289);

static void BM_DiameterAtMost(benchmark::State& state) {
  const auto e = Ensemble::sphere_sample(2, static_cast<std::size_t>(state.range(0)), 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(diameter_at_most(e, 0, e.size(), 0.2));
}
BENCHMARK(BM_DiameterAtMost)->Arg(64)->Arg(256);

static void BM_CurveRefinement(benchmark::State& state) {
  for (auto _ : state) {
    auto e = Ensemble::sphere_sample(2, 64, 1.0);
    std::uint32_t next = 64;
    benchmark::DoNotOptimize(refine_closed_curve(e, 64, 64, next, {0.1, 0.01, 10, 1u << 16}));
  }
}
BENCHMARK(BM_CurveRefinement);

static void BM_PolarStep(benchmark::State& state) {
  const auto p = RadialPotential::quartic();
  PolarState s;
  const NoisePath base(1, 0, 1e-3, 2);
  ScaledView view(base, 0.1);
  double w[2];
  for (auto _ : state) {
    view.next_increment(w);
    s = polar_step(p, s, 0.1, w, view.dt());
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_PolarStep);

static void BM_LyapunovReplica(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(lyapunov_circle(100.0, 1e-3, 1, 1, 1.0, 1).lambda);
}
BENCHMARK(BM_LyapunovReplica)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
