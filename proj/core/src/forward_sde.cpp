#include "mzsg/forward_sde.hpp"

#include <cmath>
#include <string>

#include "mzsg/parallel.hpp"
#include "mzsg/rng.hpp"

namespace mzsg {

namespace {

void check_state_finite(const Vec& x, int path, int step) {
    for (double v : x)
        if (!std::isfinite(v))
            throw NumericsError("simulation overflow: non-finite state at path " +
                                std::to_string(path) + ", step " + std::to_string(step));
}

PathBundle make_bundle(const GameModel& model, const TimeGrid& grid, int path_count,
                       std::uint64_t seed, bool controlled) {
    if (path_count < 1) throw ModelError("simulate: path_count must be >= 1");
    if (static_cast<int>(model.initial_state.size()) != model.dim)
        throw ModelError("simulate: initial_state dimension mismatch");
    PathBundle b;
    b.grid = grid;
    b.path_count = path_count;
    b.dim = model.dim;
    b.seed = seed;
    b.controlled = controlled;
    const auto N = static_cast<std::size_t>(grid.step_count);
    b.states.resize(static_cast<std::size_t>(path_count) * (N + 1) * model.dim);
    b.increments.resize(static_cast<std::size_t>(path_count) * N * model.dim);
    if (controlled) b.control_indices.resize(static_cast<std::size_t>(path_count) * N * 2);
    return b;
}

// One path of the Euler scheme; with_drift selects the controlled dynamics.
template <bool WithDrift>
void run_path(const GameModel& model, const TimeGrid& grid, PathBundle& b, int m,
              const ControlFeedback* ca, const ControlFeedback* cb) {
    const int N = grid.step_count;
    const int d = model.dim;
    const double dt = grid.dt();
    const double sqrt_dt = std::sqrt(dt);

    Vec x = model.initial_state;
    Vec dB(d), next(d);
    double* states = &b.states[static_cast<std::size_t>(m) * (N + 1) * d];
    double* incs = &b.increments[static_cast<std::size_t>(m) * N * d];
    for (int k = 0; k < d; ++k) states[k] = x[k];

    for (int i = 0; i < N; ++i) {
        normal_fill(b.seed, RngStream::Increments, static_cast<std::uint32_t>(m),
                    static_cast<std::uint32_t>(i), dB.data(), d);
        for (int k = 0; k < d; ++k) {
            dB[k] *= sqrt_dt;
            incs[static_cast<std::size_t>(i) * d + k] = dB[k];
        }
        const double t = grid.time(i);
        const Matrix sigma = model.diffusion(t, x);
        const Vec noise = sigma.apply(dB);
        if constexpr (WithDrift) {
            const std::size_t ia = (*ca)(i, t, x);
            const std::size_t ib = (*cb)(i, t, x);
            if (ia >= model.control_grid_a.size() || ib >= model.control_grid_b.size())
                throw ModelError("feedback control returned an out-of-range grid index");
            b.control_indices[(static_cast<std::size_t>(m) * N + i) * 2] =
                static_cast<std::uint32_t>(ia);
            b.control_indices[(static_cast<std::size_t>(m) * N + i) * 2 + 1] =
                static_cast<std::uint32_t>(ib);
            const Vec f =
                model.drift(t, x, model.control_grid_a[ia], model.control_grid_b[ib]);
            for (int k = 0; k < d; ++k) next[k] = x[k] + f[k] * dt + noise[k];
        } else {
            for (int k = 0; k < d; ++k) next[k] = x[k] + noise[k];
        }
        check_state_finite(next, m, i + 1);
        x = next;
        for (int k = 0; k < d; ++k) states[static_cast<std::size_t>(i + 1) * d + k] = x[k];
    }
}

} // namespace

PathBundle simulate_uncontrolled(const GameModel& model, const TimeGrid& grid, int path_count,
                                 std::uint64_t seed) {
    PathBundle b = make_bundle(model, grid, path_count, seed, false);
    parallel_for(static_cast<std::size_t>(path_count), [&](std::size_t m) {
        run_path<false>(model, grid, b, static_cast<int>(m), nullptr, nullptr);
    });
    return b;
}

PathBundle simulate_controlled(const GameModel& model, const TimeGrid& grid,
                               const ControlFeedback& control_a, const ControlFeedback& control_b,
                               int path_count, std::uint64_t seed) {
    PathBundle b = make_bundle(model, grid, path_count, seed, true);
    parallel_for(static_cast<std::size_t>(path_count), [&](std::size_t m) {
        run_path<true>(model, grid, b, static_cast<int>(m), &control_a, &control_b);
    });
    return b;
}

DensityVector girsanov_density(const GameModel& model, const PathBundle& bundle,
                               const ControlFeedback& control_a,
                               const ControlFeedback& control_b) {
    if (bundle.controlled)
        throw ModelError("girsanov_density: bundle must be uncontrolled (its increments "
                         "must be the driving Brownian motion)");
    const int N = bundle.grid.step_count;
    const int d = bundle.dim;
    const double dt = bundle.grid.dt();

    DensityVector out;
    out.values.resize(bundle.path_count);
    parallel_for(static_cast<std::size_t>(bundle.path_count), [&](std::size_t m) {
        double log_density = 0.0;
        Vec x(d), dB(d);
        for (int i = 0; i < N; ++i) {
            const double t = bundle.grid.time(i);
            for (int k = 0; k < d; ++k) {
                x[k] = bundle.state(static_cast<int>(m), i, k);
                dB[k] = bundle.increment(static_cast<int>(m), i, k);
            }
            const std::size_t ia = control_a(i, t, x);
            const std::size_t ib = control_b(i, t, x);
            const Vec f =
                model.drift(t, x, model.control_grid_a.at(ia), model.control_grid_b.at(ib));
            const LuFactors lu = factor_sigma(model, t, x);
            const Vec theta = lu_solve(lu, f);
            log_density += dot(theta, dB) - 0.5 * dot(theta, theta) * dt;
        }
        const double density = std::exp(log_density);
        if (!(density > 0.0) || !std::isfinite(density))
            throw NumericsError("girsanov_density: degenerate density on path " +
                                std::to_string(m));
        out.values[m] = density;
    });
    return out;
}

double moment_estimate(const PathBundle& bundle, double q) {
    const int N = bundle.grid.step_count;
    const int d = bundle.dim;
    const double total = chunked_sum(static_cast<std::size_t>(bundle.path_count),
                                     [&](std::size_t m) {
                                         double sup = 0.0;
                                         for (int i = 0; i <= N; ++i) {
                                             double s = 0.0;
                                             for (int k = 0; k < d; ++k) {
                                                 const double v =
                                                     bundle.state(static_cast<int>(m), i, k);
                                                 s += v * v;
                                             }
                                             sup = std::max(sup, s);
                                         }
                                         return std::pow(std::sqrt(sup), q);
                                     });
    return total / bundle.path_count;
}

} // namespace mzsg
