#include "mzsg/model.hpp"

#include <array>
#include <cmath>

#include "mzsg/parallel.hpp"
#include "mzsg/rng.hpp"

namespace mzsg {

namespace {

std::string point_string(double t, const Vec& x) {
    std::string s = "t=" + std::to_string(t) + ", x=(";
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (k) s += ", ";
        s += std::to_string(x[k]);
    }
    return s + ")";
}

struct Probe {
    double t;
    Vec x;
    double a;
    double b;
};

Probe make_probe(const GameModel& m, std::uint64_t seed, int index, double radius) {
    Probe p;
    const auto id = static_cast<std::uint32_t>(index);
    p.t = m.horizon * uniform_at(seed, RngStream::ValidationProbes, id, 0, 0);
    p.x.resize(m.dim);
    for (int k = 0; k < m.dim; ++k)
        p.x[k] = radius * (2.0 * uniform_at(seed, RngStream::ValidationProbes, id, 1,
                                            static_cast<std::uint32_t>(k)) -
                           1.0);
    const double ua = uniform_at(seed, RngStream::ValidationProbes, id, 2, 0);
    const double ub = uniform_at(seed, RngStream::ValidationProbes, id, 2, 1);
    p.a = m.control_grid_a[static_cast<std::size_t>(ua * m.control_grid_a.size()) %
                           m.control_grid_a.size()];
    p.b = m.control_grid_b[static_cast<std::size_t>(ub * m.control_grid_b.size()) %
                           m.control_grid_b.size()];
    return p;
}

double require_finite(double v, const char* what, double t, const Vec& x) {
    if (!std::isfinite(v))
        throw ModelError(std::string("validate_model: ") + what +
                         " returned a non-finite value at " + point_string(t, x));
    return v;
}

} // namespace

LuFactors factor_sigma(const GameModel& model, double t, const Vec& x) {
    Matrix s = model.diffusion(t, x);
    for (double v : s.data())
        if (!std::isfinite(v))
            throw NumericsError("diffusion returned a non-finite entry at " + point_string(t, x));
    if (s.dim() == 1) {
        // cond_1 of a nonzero scalar is exactly 1; the gate reduces to s != 0.
        if (s(0, 0) == 0.0)
            throw NumericsError("diffusion is singular at " + point_string(t, x));
        return LuFactors{std::move(s), {0}};
    }
    const double cond = condition_1(s);
    if (!(cond <= model.sigma_condition_bound))
        throw NumericsError("diffusion is singular or ill-conditioned (cond_1 = " +
                            std::to_string(cond) + ") at " + point_string(t, x));
    return lu_factor(s);
}

ValidationReport validate_model(const GameModel& model, int probe_count, std::uint64_t seed,
                                const ValidationOptions& options) {
    if (probe_count < 1) throw ModelError("validate_model: probe_count must be >= 1");
    if (model.control_grid_a.empty() || model.control_grid_b.empty())
        throw ModelError("validate_model: control grids must be non-empty");
    if (model.dim < 1) throw ModelError("validate_model: dim must be >= 1");
    if (!(model.horizon > 0.0)) throw ModelError("validate_model: horizon must be > 0");
    if (static_cast<int>(model.initial_state.size()) != model.dim)
        throw ModelError("validate_model: initial_state dimension mismatch");

    const double C = model.growth_constant;
    const double p = model.growth_exponent;

    // One entry per assumption; max-reduced over probes, so the aggregate is
    // independent of evaluation order.
    enum {
        kDriftGrowth = 0,
        kCostGrowth,
        kTerminalGrowth,
        kLowerGrowth,
        kUpperGrowth,
        kStrictOrdering,
        kTerminalSandwich,
        kSigmaCondition,
        kEntryCount,
    };
    ValidationReport report;
    report.entries.resize(kEntryCount);
    auto& e = report.entries;
    e[kDriftGrowth].assumption = "drift linear growth |f| <= C(1+|x|)";
    e[kCostGrowth].assumption = "running cost polynomial growth |Gamma| <= C(1+|x|^p)";
    e[kTerminalGrowth].assumption = "terminal polynomial growth |g| <= C(1+|x|^p)";
    e[kLowerGrowth].assumption = "lower obstacle polynomial growth";
    e[kUpperGrowth].assumption = "upper obstacle polynomial growth";
    e[kStrictOrdering].assumption = "strict obstacle ordering h < h'";
    e[kTerminalSandwich].assumption = "terminal sandwich h(T,.) <= g <= h'(T,.)";
    e[kSigmaCondition].assumption = "diffusion invertible within condition bound";
    // Strict ordering must have positive separation: violation is the signed
    // value h - h', so equality (0) fails against the negative tolerance.
    e[kStrictOrdering].tolerance = -1e-12;
    e[kTerminalSandwich].tolerance = 1e-12;

    std::vector<std::array<double, kEntryCount>> worst(probe_count);

    parallel_for(static_cast<std::size_t>(probe_count), [&](std::size_t i) {
        const Probe probe = make_probe(model, seed, static_cast<int>(i), options.probe_radius);
        const double xn = norm_2(probe.x);
        auto& w = worst[i];

        const Vec f = model.drift(probe.t, probe.x, probe.a, probe.b);
        for (double v : f) require_finite(v, "drift", probe.t, probe.x);
        w[kDriftGrowth] = norm_2(f) - C * (1.0 + xn);

        const double gamma =
            require_finite(model.running_cost(probe.t, probe.x, probe.a, probe.b),
                           "running_cost", probe.t, probe.x);
        const double poly_bound = C * (1.0 + std::pow(xn, p));
        w[kCostGrowth] = std::fabs(gamma) - poly_bound;

        const double g = require_finite(model.terminal(probe.x), "terminal", probe.t, probe.x);
        w[kTerminalGrowth] = std::fabs(g) - poly_bound;

        const double lo = require_finite(model.lower_obstacle(probe.t, probe.x),
                                         "lower_obstacle", probe.t, probe.x);
        const double hi = require_finite(model.upper_obstacle(probe.t, probe.x),
                                         "upper_obstacle", probe.t, probe.x);
        w[kLowerGrowth] = std::fabs(lo) - poly_bound;
        w[kUpperGrowth] = std::fabs(hi) - poly_bound;
        w[kStrictOrdering] = lo - hi;

        const double loT = require_finite(model.lower_obstacle(model.horizon, probe.x),
                                          "lower_obstacle", model.horizon, probe.x);
        const double hiT = require_finite(model.upper_obstacle(model.horizon, probe.x),
                                          "upper_obstacle", model.horizon, probe.x);
        w[kTerminalSandwich] = std::max(loT - g, g - hiT);

        const Matrix s = model.diffusion(probe.t, probe.x);
        for (double v : s.data()) require_finite(v, "diffusion", probe.t, probe.x);
        w[kSigmaCondition] = condition_1(s) - model.sigma_condition_bound;
    });

    // Sequential max-reduction; records the worst probe per assumption.
    for (int i = 0; i < probe_count; ++i) {
        for (int k = 0; k < kEntryCount; ++k) {
            const double v = worst[i][k];
            if (i == 0 || v > e[k].violation) {
                const Probe probe = make_probe(model, seed, i, options.probe_radius);
                e[k].violation = v;
                e[k].worst_time = probe.t;
                e[k].worst_state = probe.x;
            }
        }
    }

    report.passed = true;
    for (auto& entry : e) {
        entry.probes_used = probe_count;
        entry.passed = entry.violation <= entry.tolerance;
        report.passed = report.passed && entry.passed;
    }
    return report;
}

} // namespace mzsg
