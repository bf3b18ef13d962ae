// Compares the OpenMP line sweep against the serial reference kernel.
#include <benchmark/benchmark.h>

#include "darboux/determined.hpp"
#include "darboux/specfile.hpp"

using namespace darboux;

namespace {

ValidatedSystem coupled_system() {
    SystemSpec spec;
    spec.n = 2;
    spec.base = {0.0, 0.0};
    spec.unknowns.push_back({"u", MultiIndex{1}, 1});
    spec.unknowns.push_back({"v", MultiIndex{2}, 1});
    spec.equations.insert({{"u", 1, 1}, parse_expr("sin(x2) + 0.3*v")});
    spec.equations.insert({{"v", 2, 1}, parse_expr("cos(x1) - 0.3*u")});
    spec.data.insert({{"u", 1}, parse_expr("x2")});
    spec.data.insert({{"v", 1}, parse_expr("1")});
    return ValidatedSystem::validate(spec);
}

void run(benchmark::State& state, bool parallel) {
    ValidatedSystem sys = coupled_system();
    int m = (int)state.range(0);
    Grid grid({{0, 0.25, m}, {0, 0.25, m}});
    PicardOptions opts;
    opts.parallel = parallel;
    for (auto _ : state) {
        GridSolution sol = solve_determined(sys, grid, opts);
        benchmark::DoNotOptimize(sol.fields);
    }
    state.SetItemsProcessed(state.iterations() * (int64_t)grid.size());
}

void BM_sweep_serial(benchmark::State& state) { run(state, false); }
void BM_sweep_parallel(benchmark::State& state) { run(state, true); }

}  // namespace

BENCHMARK(BM_sweep_serial)->Arg(129)->Arg(257)->Arg(513)
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_sweep_parallel)->Arg(129)->Arg(257)->Arg(513)
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
