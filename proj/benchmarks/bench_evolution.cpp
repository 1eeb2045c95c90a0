#include <benchmark/benchmark.h>

#include "dispersim/evolution.hpp"

using namespace dispersim;

static void BM_EvolveLine(benchmark::State& state) {
    const double t = static_cast<double>(state.range(0));
    const auto phi = LatticeState::delta(0);
    for (auto _ : state) {
        auto r = evolve_line(phi, t);
        benchmark::DoNotOptimize(r.state.values().data());
    }
}
BENCHMARK(BM_EvolveLine)->RangeMultiplier(10)->Range(10, 100000)->Unit(benchmark::kMicrosecond);

// First call pays for the eigendecomposition; later calls hit the cache.
static void BM_CoupledEigendecomposition(benchmark::State& state) {
    const CoupledLatticeSpec spec{1.0, 2.0, state.range(0)};
    for (auto _ : state) {
        clear_coupled_cache();
        benchmark::DoNotOptimize(coupled_spectrum(spec).data());
    }
}
BENCHMARK(BM_CoupledEigendecomposition)->Arg(250)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_CoupledCachedApply(benchmark::State& state) {
    const CoupledLatticeSpec spec{1.0, 2.0, state.range(0)};
    const auto phi = LatticeState::delta(-3);
    (void)evolve_coupled(spec, phi, 1.0);
    for (auto _ : state) {
        auto r = evolve_coupled(spec, phi, 50.0);
        benchmark::DoNotOptimize(r.state.values().data());
    }
    clear_coupled_cache();
}
BENCHMARK(BM_CoupledCachedApply)->Arg(250)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);
