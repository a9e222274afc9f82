// Microbenchmarks for the hot numerical kernels. Desk-scale runs are
// dominated by the Hamiltonian grid scan, so regressions here show up
// directly in end-to-end runtime.

#include <benchmark/benchmark.h>

#include "mzsg/builtins.hpp"
#include "mzsg/drbsde.hpp"
#include "mzsg/forward_sde.hpp"
#include "mzsg/obstacle_pde.hpp"

using namespace mzsg;

namespace {

void BM_isaacs_infsup(benchmark::State& state) {
    const GameModel m = builtin_model("isaacs-separated-1d"); // 21x21 grid
    const Vec x{0.3};
    double zv = -1.0;
    for (auto _ : state) {
        const Vec z{zv};
        benchmark::DoNotOptimize(isaacs_infsup(m, 0.5, x, z));
        zv += 1e-4;
    }
    state.SetItemsProcessed(state.iterations() *
                            static_cast<long>(m.control_grid_a.size() *
                                              m.control_grid_b.size()));
}
BENCHMARK(BM_isaacs_infsup);

void BM_simulate_paths(benchmark::State& state) {
    const GameModel m = builtin_model("zero");
    const TimeGrid grid(50, 1.0);
    for (auto _ : state)
        benchmark::DoNotOptimize(simulate_uncontrolled(m, grid, 2000, 7));
    state.SetItemsProcessed(state.iterations() * 2000 * 50);
}
BENCHMARK(BM_simulate_paths);

void BM_drbsde_solve(benchmark::State& state) {
    const GameModel m = builtin_model("dynkin-1d"); // 3x3 control grid
    const PathBundle b = simulate_uncontrolled(m, TimeGrid(25, 1.0), 4000, 11);
    DrbsdeOptions options;
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_drbsde(m, b, RegressionBasis{},
                                              GeneratorSpec{GeneratorSpec::Kind::HStar, 0, 0},
                                              options));
        options.audit_isaacs = false;
    }
    state.SetItemsProcessed(state.iterations() * 4000 * 25);
}
BENCHMARK(BM_drbsde_solve);

void BM_pde_solve(benchmark::State& state) {
    const GameModel m = builtin_model("isaacs-separated-1d");
    const TimeGrid tgrid(10, 1.0);
    const SpaceGrid sgrid({-4.0}, {4.0}, {101});
    PdeOptions options;
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_double_obstacle_pde(m, tgrid, sgrid, options));
        options.audit_isaacs = false;
    }
}
BENCHMARK(BM_pde_solve);

void BM_regression_step(benchmark::State& state) {
    const GameModel m = builtin_model("linear-heat");
    const PathBundle b = simulate_uncontrolled(m, TimeGrid(10, 1.0), 20000, 13);
    std::vector<double> response(20000);
    for (int i = 0; i < 20000; ++i) response[i] = b.state(i, 10, 0);
    std::vector<double> fitted;
    for (auto _ : state) {
        StepRegression reg(RegressionBasis{}, b, 5, "bench");
        benchmark::DoNotOptimize(reg.fit(response, &fitted));
    }
    state.SetItemsProcessed(state.iterations() * 20000);
}
BENCHMARK(BM_regression_step);

} // namespace

BENCHMARK_MAIN();
