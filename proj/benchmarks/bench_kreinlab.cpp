#include <benchmark/benchmark.h>

#include <cstdint>

#include "kreinlab/excursion.hpp"
#include "kreinlab/krein.hpp"
#include "kreinlab/levy.hpp"
#include "kreinlab/pathsim.hpp"
#include "kreinlab/rng.hpp"
#include "kreinlab/specialfn.hpp"

using namespace kreinlab;

static void BM_BesselK(benchmark::State& state) {
  double x = 0.01;
  for (auto _ : state) {
    benchmark::DoNotOptimize(specialfn::bessel_k(0.3, x));
    x = x > 30 ? 0.01 : x * 1.01;
  }
}
BENCHMARK(BM_BesselK);

static void BM_HFunctionTable(benchmark::State& state) {
  const krein::HFunction h(static_cast<double>(state.range(0)) / 100.0);
  double x = 1e-4;
  for (auto _ : state) {
    benchmark::DoNotOptimize(h(x));
    x = x > 1e3 ? 1e-4 : x * 1.001;
  }
}
BENCHMARK(BM_HFunctionTable)->Arg(0)->Arg(50)->Arg(75);

static void BM_HFunctionExact(benchmark::State& state) {
  double x = 1e-3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(krein::h_function(0.0, x));
    x = x > 1e2 ? 1e-3 : x * 1.01;
  }
}
BENCHMARK(BM_HFunctionExact);

static void BM_LaplaceExponentQuadrature(benchmark::State& state) {
  const auto spec = levy::LevySpec::make(0.5, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(levy::laplace_exponent_by_quadrature(spec, 1.0));
}
BENCHMARK(BM_LaplaceExponentQuadrature);

static void BM_TemperedIncrement(benchmark::State& state) {
  const auto spec = levy::LevySpec::make(0.5, 1.0);
  Rng rng(1, 2, 3);
  for (auto _ : state) benchmark::DoNotOptimize(levy::sample_increment(spec, 0.1, rng));
}
BENCHMARK(BM_TemperedIncrement);

static void BM_GammaIncrement(benchmark::State& state) {
  const auto spec = levy::LevySpec::make(0.0, 1.0);
  Rng rng(1, 2, 3);
  for (auto _ : state) benchmark::DoNotOptimize(levy::sample_increment(spec, 0.5, rng));
}
BENCHMARK(BM_GammaIncrement);

// walk to tau_{0.05} accumulating h_0; reports steps per second
static void BM_WalkToLocalTime(benchmark::State& state) {
  const krein::HFunction h(0.0);
  pathsim::WalkOptions opt;
  std::uint64_t i = 0;
  std::uint64_t steps = 0;
  for (auto _ : state) {
    auto rng = Rng::for_replication(5, "bench/walk", i++);
    const auto [w, a] = pathsim::functional_at_local_time(0.05, opt, rng, h);
    benchmark::DoNotOptimize(a);
    steps += w.steps;
  }
  state.counters["steps"] = benchmark::Counter(static_cast<double>(steps), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_WalkToLocalTime);

static void BM_BesselBridge(benchmark::State& state) {
  Rng rng(7, 8, 9);
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(excursion::bessel_bridge(3.0, 1.0, n, rng));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_BesselBridge)->Arg(256)->Arg(4096);

BENCHMARK_MAIN();
