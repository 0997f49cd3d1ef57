#include <benchmark/benchmark.h>

#include "frobenius/verify.hpp"

using namespace frobenius;

namespace {

const TimeFunction kTwoPlusCos = TimeFunction::trigonometric(2, 1, 1, 0);

FamilyInstance make(int which) {
  switch (which) {
    case 0:
      return forced_oscillator(kTwoPlusCos, TimeFunction::polynomial({0, 0, 1}));
    case 1:
      return sarlet(kTwoPlusCos, TimeFunction::trigonometric(0, 0.5, 1, -1.5707963267948966),
                    TimeFunction::polynomial({0.3, 0.1}));
    case 2:
      return quadratic(kTwoPlusCos, TimeFunction::trigonometric(0, 1, 1, -1.5707963267948966),
                       SpaceProfile::polynomial({0, 0, 0, 0, 1}));
    case 3:
      return giacomini(SpaceProfile::polynomial({0, 1}), SpaceProfile::exponential(0.5, 0.5));
    default:
      return abel_family(kTwoPlusCos, 1.0, SpaceProfile::polynomial({0, 0, 0.5}));
  }
}

const char* kNames[] = {"forced_oscillator", "sarlet", "quadratic", "giacomini", "abel"};

}  // namespace

static void BM_ResidualScan(benchmark::State& state) {
  const auto fam = make(static_cast<int>(state.range(0)));
  state.SetLabel(kNames[state.range(0)]);
  ScanOptions opts;
  opts.threads = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(residual_scan(fam, GridSpec{}, 1e-6, opts).max_abs);
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_ResidualScan)->ArgsProduct({{0, 1, 2, 3, 4}, {1}})->Args({4, 4})->Unit(benchmark::kMillisecond);

static void BM_FamilyConstruction(benchmark::State& state) {
  state.SetLabel(kNames[state.range(0)]);
  for (auto _ : state) benchmark::DoNotOptimize(make(static_cast<int>(state.range(0))).label);
}
BENCHMARK(BM_FamilyConstruction)->DenseRange(0, 4)->Unit(benchmark::kMicrosecond);

static void BM_DriftCheck(benchmark::State& state) {
  const auto fam = make(2);
  SampleBox box;
  box.q = {-1, 1, 1};
  box.p = {-1, 1, 1};
  box.t = {0, 0, 1};
  const auto inits = sample_states(fam.invariant_guard(), box, 20);
  for (auto _ : state) {
    benchmark::DoNotOptimize(drift_check(fam, inits, 5.0, IntegratorConfig{}, 1e-6).max_drift);
  }
}
BENCHMARK(BM_DriftCheck)->Unit(benchmark::kMillisecond);

static void BM_GiacominiImplicitPotential(benchmark::State& state) {
  const auto c2 = SpaceProfile::polynomial({0, 1});
  const auto W = SpaceProfile::exponential(0.5, 0.5);
  double q = -2.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(giacomini_potential(c2, W, q, 1.3));
    q = q > 2.0 ? -2.0 : q + 0.01;
  }
}
BENCHMARK(BM_GiacominiImplicitPotential);
