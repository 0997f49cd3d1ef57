#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "frobenius/numerics.hpp"

using namespace frobenius;

static void BM_IntegrateHarmonicPeriod(benchmark::State& state) {
  const auto V = PotentialSpec::analytic([](auto q, auto) { return 0.5 * q * q; });
  IntegratorConfig cfg;
  cfg.rel_tol = std::pow(10.0, -static_cast<double>(state.range(0)));
  cfg.abs_tol = cfg.rel_tol * 1e-2;
  std::size_t steps = 0;
  for (auto _ : state) {
    const auto tr = integrate(V, {1, 0, 0}, 2 * std::numbers::pi, cfg);
    steps = tr.accepted_steps;
    benchmark::DoNotOptimize(tr.back());
  }
  state.counters["steps"] = static_cast<double>(steps);
}
BENCHMARK(BM_IntegrateHarmonicPeriod)->Arg(6)->Arg(8)->Arg(10)->Arg(12);

static void BM_IntegrateWithDenseOutput(benchmark::State& state) {
  const auto V = PotentialSpec::analytic([](auto q, auto) { return 0.25 * q * q * q * q; });
  IntegratorConfig cfg;
  cfg.dense_output = true;
  for (auto _ : state) {
    benchmark::DoNotOptimize(integrate(V, {1, 0, 0}, 10.0, cfg).segments.size());
  }
}
BENCHMARK(BM_IntegrateWithDenseOutput);

static void BM_QuadInverseSquare(benchmark::State& state) {
  const auto f = [](double t) { return 1.0 / std::pow(2.0 + std::cos(t), 2); };
  const double tol = std::pow(10.0, -static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(quad(f, 0.0, 5.0, tol));
}
BENCHMARK(BM_QuadInverseSquare)->Arg(8)->Arg(12)->Arg(14);

static void BM_CumulativeQuadratureLookup(benchmark::State& state) {
  const CumulativeQuadrature F([](double t) { return 1.0 / std::pow(2.0 + std::cos(t), 2); }, 0.0,
                               {0.0, 5.0});
  double t = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(F(t));
    t = t > 5.0 ? 0.0 : t + 0.0137;
  }
}
BENCHMARK(BM_CumulativeQuadratureLookup);

static void BM_FindRoot(benchmark::State& state) {
  const auto g = [](double V) { return V - (2 - V) * (2 - V); };
  for (auto _ : state) benchmark::DoNotOptimize(find_root(g, 0.0, 2.0, 1e-14));
}
BENCHMARK(BM_FindRoot);
BENCHMARK_MAIN();
