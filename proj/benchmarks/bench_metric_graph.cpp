#include <cmath>

#include <benchmark/benchmark.h>

#include "dispersim/metric_graph.hpp"

using namespace dispersim;

namespace {

std::vector<cdouble> gaussian(const LineGrid& grid) {
    std::vector<cdouble> v(grid.size);
    for (std::size_t k = 0; k < grid.size; ++k) v[k] = std::exp(-0.5 * grid.x(k) * grid.x(k));
    return v;
}

}  // namespace

// Ten Crank-Nicolson steps; reported per grid node.
static void BM_CrankNicolsonLine(benchmark::State& state) {
    const double half_length = static_cast<double>(state.range(0));
    const auto grid = LineGrid::centered(half_length, 0.02);
    const auto phi = gaussian(grid);
    CrankNicolsonSettings s;
    s.dt = 0.01;
    s.output_times = {0.1};
    for (auto _ : state) {
        auto trace = evolve_stepline({{0.0}, {1.0, 4.0}}, grid, phi, s);
        benchmark::DoNotOptimize(trace.final_state.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(grid.size) * 10);
}
BENCHMARK(BM_CrankNicolsonLine)->Arg(40)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_CrankNicolsonStar(benchmark::State& state) {
    const StarGraphSpec spec{static_cast<std::size_t>(state.range(0)), 100.0, DeltaCoupling{1.0}};
    const std::size_t n = star_edge_samples(spec, 0.02);
    StarState phi;
    phi.edges.assign(spec.edge_count, std::vector<cdouble>(n));
    for (std::size_t k = 0; k < n; ++k) {
        const double x = static_cast<double>(k) * 0.02;
        for (auto& e : phi.edges) e[k] = std::exp(-0.5 * x * x);
    }
    CrankNicolsonSettings s;
    s.dt = 0.01;
    s.output_times = {0.1};
    for (auto _ : state) {
        auto trace = evolve_star(spec, 0.02, phi, s);
        benchmark::DoNotOptimize(trace.final_state.edges.data());
    }
}
BENCHMARK(BM_CrankNicolsonStar)->Arg(3)->Arg(8)->Unit(benchmark::kMillisecond);

static void BM_BoundStates(benchmark::State& state) {
    const auto grid = LineGrid::centered(40.0, 1.0 / static_cast<double>(state.range(0)));
    const DeltaPotentialSpec spec{{-2.0, -1.0}, {-0.7, 1.1}};
    for (auto _ : state) {
        auto b = bound_states(spec, grid);
        benchmark::DoNotOptimize(b.data());
    }
}
BENCHMARK(BM_BoundStates)->Arg(50)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);
