#include <benchmark/benchmark.h>

#include "dispersim/decay.hpp"
#include "dispersim/kernel.hpp"

using namespace dispersim;

static void BM_KernelQuadrature(benchmark::State& state) {
    const double t = static_cast<double>(state.range(0));
    std::int64_t j = 0;
    for (auto _ : state) {
        auto r = kernel_quadrature({t, j}, 1e-10);
        benchmark::DoNotOptimize(r);
        j = (j + 7) % 400;
    }
}
BENCHMARK(BM_KernelQuadrature)->RangeMultiplier(10)->Range(1, 10000);

static void BM_KernelBessel(benchmark::State& state) {
    const double t = static_cast<double>(state.range(0));
    for (auto _ : state) {
        auto v = kernel_bessel({t, 17});
        benchmark::DoNotOptimize(v);
    }
}
BENCHMARK(BM_KernelBessel)->RangeMultiplier(10)->Range(1, 10000);

// Whole row by backward recurrence; cost is linear in the row length.
static void BM_BesselSequence(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        auto seq = bessel_j_sequence(0.5 * static_cast<double>(n), n);
        benchmark::DoNotOptimize(seq.data());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BesselSequence)->RangeMultiplier(4)->Range(64, 1 << 18)->Complexity(benchmark::oN);

static void BM_OscillatoryIntegral(benchmark::State& state) {
    const double t = static_cast<double>(state.range(0));
    for (auto _ : state) {
        auto r = coupled_oscillatory_integral({t, 2.0, -1.0, 0.5}, 1e-10);
        benchmark::DoNotOptimize(r);
    }
}
BENCHMARK(BM_OscillatoryIntegral)->RangeMultiplier(10)->Range(1, 1000);

static void BM_TorusSupnorm(benchmark::State& state) {
    const auto data = TorusData::ones(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(torus_supnorm(data, 0.01));
    }
}
BENCHMARK(BM_TorusSupnorm)->Arg(8)->Arg(32)->Arg(128);
