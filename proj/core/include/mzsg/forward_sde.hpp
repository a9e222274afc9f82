#ifndef MZSG_FORWARD_SDE_HPP
#define MZSG_FORWARD_SDE_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "mzsg/grids.hpp"
#include "mzsg/model.hpp"

namespace mzsg {

/// Feedback control for one player: (step, t, state) -> index into that
/// player's control grid. Must be pure and thread-safe.
using ControlFeedback = std::function<std::size_t(int, double, const Vec&)>;

inline ControlFeedback constant_control(std::size_t index) {
    return [index](int, double, const Vec&) { return index; };
}

/// Euler-Maruyama paths of the state diffusion with their driving Brownian
/// increments. Increment (m, i) is a pure function of (seed, m, i), so
/// bundles are bit-identical regardless of worker count.
struct PathBundle {
    TimeGrid grid;
    int path_count = 0;
    int dim = 0;
    std::uint64_t seed = 0;
    bool controlled = false;

    std::vector<double> states;     // (m, i, k) -> path m, step i=0..N, coord k
    std::vector<double> increments; // (m, i, k) -> i=0..N-1
    std::vector<std::uint32_t> control_indices; // (m, i, player), controlled only

    double state(int m, int i, int k) const {
        return states[(static_cast<std::size_t>(m) * (grid.step_count + 1) + i) * dim + k];
    }
    const double* state_ptr(int m, int i) const {
        return &states[(static_cast<std::size_t>(m) * (grid.step_count + 1) + i) * dim];
    }
    Vec state_vec(int m, int i) const {
        const double* p = state_ptr(m, i);
        return Vec(p, p + dim);
    }
    double increment(int m, int i, int k) const {
        return increments[(static_cast<std::size_t>(m) * grid.step_count + i) * dim + k];
    }
};

PathBundle simulate_uncontrolled(const GameModel& model, const TimeGrid& grid, int path_count,
                                 std::uint64_t seed);

/// Strong simulation of the controlled dynamics: the feedback drift is added
/// in the Euler step rather than introduced by reweighting. Records the
/// control indices used at every (path, step).
PathBundle simulate_controlled(const GameModel& model, const TimeGrid& grid,
                               const ControlFeedback& control_a, const ControlFeedback& control_b,
                               int path_count, std::uint64_t seed);

/// Per-path Girsanov densities for an uncontrolled bundle: the discretized
/// stochastic exponential of sigma^{-1} f along each path.
struct DensityVector {
    std::vector<double> values;
};

DensityVector girsanov_density(const GameModel& model, const PathBundle& bundle,
                               const ControlFeedback& control_a,
                               const ControlFeedback& control_b);

/// Monte Carlo estimate of E[ sup_i |X_i|^q ].
double moment_estimate(const PathBundle& bundle, double q);

} // namespace mzsg

#endif // MZSG_FORWARD_SDE_HPP
