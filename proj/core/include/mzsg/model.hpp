#ifndef MZSG_MODEL_HPP
#define MZSG_MODEL_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mzsg/linalg.hpp"

namespace mzsg {

/// Full problem data for one mixed game: state diffusion, controlled drift,
/// running and terminal rewards, the two obstacles, finite control grids and
/// the declared growth constants. Immutable after construction; all callables
/// must be safe to evaluate concurrently.
struct GameModel {
    int dim = 1;
    double horizon = 1.0;

    std::function<Matrix(double, const Vec&)> diffusion;                       // sigma(t,x)
    std::function<Vec(double, const Vec&, double, double)> drift;              // f(t,x,a,b)
    std::function<double(double, const Vec&, double, double)> running_cost;    // Gamma(t,x,a,b)
    std::function<double(const Vec&)> terminal;                                // g(x)
    std::function<double(double, const Vec&)> lower_obstacle;                  // h(t,x)
    std::function<double(double, const Vec&)> upper_obstacle;                  // h'(t,x)

    std::vector<double> control_grid_a;
    std::vector<double> control_grid_b;

    double growth_constant = 1.0; // C in the growth bounds
    double growth_exponent = 2.0; // p > 1
    Vec initial_state;

    double sigma_condition_bound = 1e6;

    std::string name; // registry tag, informational
};

struct ValidationEntry {
    std::string assumption;
    double violation = 0.0; // signed; entry passes iff violation <= tolerance
    double tolerance = 0.0;
    double worst_time = 0.0;
    Vec worst_state;
    int probes_used = 0;
    bool passed = true;
};

struct ValidationReport {
    bool passed = false;
    std::vector<ValidationEntry> entries;
};

struct ValidationOptions {
    double probe_radius = 10.0; // states probed with |x|_inf up to this radius
};

/// Probes the model functions at seeded pseudo-random points and reports any
/// violation of the declared growth bounds, the strict obstacle ordering, the
/// terminal sandwich and the diffusion conditioning. Deterministic for a
/// fixed seed; probe k of a long run equals probe k of a short run.
ValidationReport validate_model(const GameModel& model, int probe_count, std::uint64_t seed,
                                const ValidationOptions& options = {});

/// Condition-number gate used everywhere sigma^{-1} is needed.
LuFactors factor_sigma(const GameModel& model, double t, const Vec& x);

} // namespace mzsg

#endif // MZSG_MODEL_HPP
