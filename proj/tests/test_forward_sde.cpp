#include <doctest.h>

#include <cmath>

#include "mzsg/builtins.hpp"
#include "mzsg/forward_sde.hpp"
#include "mzsg/parallel.hpp"

using namespace mzsg;

TEST_CASE("zero diffusion keeps every path at x0") {
    GameModel m = builtin_model("zero");
    m.sigma_condition_bound = 1e18;
    m.diffusion = [](double, const Vec&) {
        Matrix s(1);
        s(0, 0) = 1e-14; // effectively frozen dynamics
        return s;
    };
    const PathBundle b = simulate_uncontrolled(m, TimeGrid(10, 1.0), 64, 5);
    for (int p = 0; p < b.path_count; ++p)
        for (int i = 0; i <= 10; ++i) CHECK(std::fabs(b.state(p, i, 0)) < 1e-12);
}

TEST_CASE("terminal variance of standard Brownian motion") {
    const GameModel m = builtin_model("zero"); // sigma = 1, x0 = 0
    const int M = 20000;
    const PathBundle b = simulate_uncontrolled(m, TimeGrid(50, 1.0), M, 7);
    double var = 0.0;
    for (int p = 0; p < M; ++p) {
        const double x = b.state(p, 50, 0);
        var += x * x;
    }
    var /= M;
    CHECK(std::fabs(var - 1.0) < 3.0 * std::sqrt(2.0 / M));
}

TEST_CASE("increment columns have the right mean and variance") {
    const GameModel m = builtin_model("zero");
    const int M = 10000, N = 20;
    const double dt = 1.0 / N;
    const PathBundle b = simulate_uncontrolled(m, TimeGrid(N, 1.0), M, 11);
    for (int i : {0, 7, N - 1}) {
        double mean = 0.0, var = 0.0;
        for (int p = 0; p < M; ++p) mean += b.increment(p, i, 0);
        mean /= M;
        for (int p = 0; p < M; ++p) {
            const double v = b.increment(p, i, 0) - mean;
            var += v * v;
        }
        var /= M;
        CHECK(std::fabs(mean) < 5.0 * std::sqrt(dt / M));
        CHECK(std::fabs(var - dt) < 5.0 * dt * std::sqrt(2.0 / M));
    }
}

TEST_CASE("bit-identical repetition and thread independence") {
    const GameModel m = builtin_model("isaacs-separated-1d");
    const TimeGrid grid(25, 1.0);
    set_thread_budget(1);
    const PathBundle a = simulate_uncontrolled(m, grid, 500, 3);
    set_thread_budget(8);
    const PathBundle b = simulate_uncontrolled(m, grid, 500, 3);
    set_thread_budget(0);
    CHECK(a.states == b.states);
    CHECK(a.increments == b.increments);
}

TEST_CASE("controlled simulation adds the feedback drift") {
    GameModel m = builtin_model("zero");
    m.control_grid_a = {1.0};
    m.control_grid_b = {0.0};
    m.drift = [](double, const Vec&, double a, double) { return Vec{0.7 * a}; };
    m.growth_constant = 1.0;
    const int M = 20000;
    const PathBundle b =
        simulate_controlled(m, TimeGrid(40, 1.0), constant_control(0), constant_control(0), M, 13);
    double mean = 0.0;
    for (int p = 0; p < M; ++p) mean += b.state(p, 40, 0);
    mean /= M;
    CHECK(std::fabs(mean - 0.7) < 3.0 / std::sqrt(static_cast<double>(M)));
    CHECK(b.controlled);
    CHECK(b.control_indices.size() == static_cast<std::size_t>(M) * 40 * 2);
}

TEST_CASE("zero drift makes controlled and uncontrolled bundles bit-identical") {
    const GameModel m = builtin_model("zero");
    const TimeGrid grid(12, 1.0);
    const PathBundle u = simulate_uncontrolled(m, grid, 100, 21);
    const PathBundle c =
        simulate_controlled(m, grid, constant_control(0), constant_control(0), 100, 21);
    CHECK(u.states == c.states);
}

TEST_CASE("girsanov densities: trivial, closed form, martingale mean") {
    const GameModel zero = builtin_model("zero");
    const TimeGrid grid(30, 1.0);
    {
        const PathBundle b = simulate_uncontrolled(zero, grid, 200, 31);
        const DensityVector d = girsanov_density(zero, b, constant_control(0), constant_control(0));
        for (double v : d.values) CHECK(v == 1.0); // f = 0 -> density exactly 1
    }

    GameModel m = builtin_model("isaacs-separated-1d");
    const PathBundle b = simulate_uncontrolled(m, grid, 20000, 37);
    // Constant controls a=+1 (last index), b=-1 (first index): theta = 0.4*(1-(-1)) = 0.8.
    const std::size_t ia = m.control_grid_a.size() - 1;
    const DensityVector d = girsanov_density(m, b, constant_control(ia), constant_control(0));

    // Closed form against the stored increments on one path.
    const double theta = 0.8;
    double bt = 0.0;
    for (int i = 0; i < 30; ++i) bt += b.increment(5, i, 0);
    CHECK(d.values[5] == doctest::Approx(std::exp(theta * bt - 0.5 * theta * theta)).epsilon(1e-12));

    double mean = 0.0;
    for (double v : d.values) {
        CHECK(v > 0.0);
        mean += v;
    }
    mean /= static_cast<double>(d.values.size());
    // E[density] = 1; lognormal std error.
    const double se = std::sqrt((std::exp(theta * theta) - 1.0) / 20000.0);
    CHECK(std::fabs(mean - 1.0) < 4.0 * se);
}

TEST_CASE("controlled bundles are rejected by girsanov_density") {
    const GameModel m = builtin_model("zero");
    const PathBundle c = simulate_controlled(m, TimeGrid(5, 1.0), constant_control(0),
                                             constant_control(0), 10, 3);
    CHECK_THROWS_AS(girsanov_density(m, c, constant_control(0), constant_control(0)), ModelError);
}

TEST_CASE("moment estimate: degenerate exponents and refined-grid oracle") {
    const GameModel m = builtin_model("zero");
    const PathBundle b = simulate_uncontrolled(m, TimeGrid(50, 1.0), 20000, 41);
    CHECK(moment_estimate(b, 0.0) == 1.0);

    // Oracle: dense-grid Monte Carlo with 10x the steps.
    const PathBundle dense = simulate_uncontrolled(m, TimeGrid(500, 1.0), 20000, 43);
    const double est = moment_estimate(b, 2.0);
    const double oracle = moment_estimate(dense, 2.0);
    // E[sup B^2] estimates agree within a few percent plus Monte Carlo noise;
    // the coarse grid underestimates the supremum slightly.
    CHECK(est == doctest::Approx(oracle).epsilon(0.10));
}

TEST_CASE("log-density telescopes to the per-step sum") {
    GameModel m = builtin_model("isaacs-separated-1d");
    const TimeGrid grid(8, 1.0);
    const PathBundle b = simulate_uncontrolled(m, grid, 4, 51);
    const std::size_t ia = m.control_grid_a.size() - 1;
    const DensityVector d = girsanov_density(m, b, constant_control(ia), constant_control(0));
    const double dt = grid.dt();
    for (int p = 0; p < 4; ++p) {
        double log_sum = 0.0;
        for (int i = 0; i < 8; ++i) {
            const double theta = 0.8; // constant within this model
            log_sum += theta * b.increment(p, i, 0) - 0.5 * theta * theta * dt;
        }
        CHECK(std::log(d.values[p]) == doctest::Approx(log_sum).epsilon(1e-11));
    }
}

TEST_CASE("density-weighted uncontrolled law matches the strong controlled law") {
    // Importance-sampling cross-check of the weak/strong equivalence:
    // E[zeta_T g(X_T)] under the uncontrolled law equals E[g(X_T)] under the
    // drift-added dynamics for the same feedback controls.
    const GameModel m = builtin_model("isaacs-separated-1d");
    const TimeGrid grid(40, 1.0);
    const int M = 20000;
    const std::size_t ia = m.control_grid_a.size() - 1; // f = 0.8 constant
    const PathBundle unc = simulate_uncontrolled(m, grid, M, 71);
    const DensityVector dens = girsanov_density(m, unc, constant_control(ia), constant_control(0));
    const PathBundle ctl =
        simulate_controlled(m, grid, constant_control(ia), constant_control(0), M, 73);

    double weighted = 0.0, weighted_sq = 0.0, strong = 0.0, strong_sq = 0.0;
    for (int p = 0; p < M; ++p) {
        const double lhs = dens.values[p] * m.terminal(unc.state_vec(p, 40));
        const double rhs = m.terminal(ctl.state_vec(p, 40));
        weighted += lhs;
        weighted_sq += lhs * lhs;
        strong += rhs;
        strong_sq += rhs * rhs;
    }
    weighted /= M;
    strong /= M;
    const double se_w = std::sqrt((weighted_sq / M - weighted * weighted) / M);
    const double se_s = std::sqrt((strong_sq / M - strong * strong) / M);
    CHECK(std::fabs(weighted - strong) < 4.0 * (se_w + se_s) + 1e-3);
}

TEST_CASE("weak error shrinks linearly in dt on a linear-coefficient model") {
    GameModel m = builtin_model("zero");
    m.diffusion = [](double, const Vec& x) {
        Matrix s(1);
        s(0, 0) = 1.0 + 0.3 * x[0];
        return s;
    };
    m.growth_constant = 2.0;
    // Second moment solves m2' = 0.09 m2 + 1 exactly; Euler inherits the
    // forward-Euler ODE error, so the bias is ~ linear in dt.
    const double exact = (std::exp(0.09) - 1.0) / 0.09;
    const int M = 400000;
    double errors[3];
    int idx = 0;
    for (int N : {2, 4, 8}) {
        const PathBundle b = simulate_uncontrolled(m, TimeGrid(N, 1.0), M, 61);
        double m2 = 0.0;
        for (int p = 0; p < M; ++p) {
            const double x = b.state(p, N, 0);
            m2 += x * x;
        }
        m2 /= M;
        errors[idx++] = std::fabs(m2 - exact);
    }
    CHECK(errors[0] > errors[2]);
    const double slope = std::log2(errors[0] / errors[2]) / 2.0;
    CHECK(slope > 0.5);
}
