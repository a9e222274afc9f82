#include "mzsg/hamiltonian.hpp"

#include <cmath>
#include <string>
#include <vector>

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

// z . sigma^{-1} f is evaluated as (sigma^{-T} z) . f so the linear solve
// happens once per (t, x, z) instead of once per control pair.
struct Scan {
    Vec w; // sigma^{-T} z

    void prepare(const GameModel& model, double t, const Vec& x, const Vec& z) {
        const Matrix sigma = model.diffusion(t, x);
        for (double v : sigma.data())
            if (!std::isfinite(v))
                throw NumericsError("diffusion returned a non-finite entry at " +
                                    point_string(t, x));
        if (sigma.dim() == 1) {
            const double s = sigma(0, 0);
            if (s == 0.0)
                throw NumericsError("diffusion is singular at " + point_string(t, x));
            w.assign(1, z[0] / s);
            return;
        }
        const double cond = condition_1(sigma);
        if (!(cond <= model.sigma_condition_bound))
            throw NumericsError("diffusion is singular or ill-conditioned (cond_1 = " +
                                std::to_string(cond) + ") at " + point_string(t, x));
        w = lu_solve_transposed(lu_factor(sigma), z);
    }

    double pair_value(const GameModel& model, double t, const Vec& x, double a,
                      double b) const {
        const Vec f = model.drift(t, x, a, b);
        double v = 0.0;
        for (std::size_t k = 0; k < w.size(); ++k) v += w[k] * f[k];
        v += model.running_cost(t, x, a, b);
        if (!std::isfinite(v))
            throw NumericsError("Hamiltonian evaluated to a non-finite value at " +
                                point_string(t, x));
        return v;
    }
};

thread_local Scan tls_scan;
thread_local std::vector<double> tls_table;

} // namespace

double hamiltonian_value(const GameModel& model, double t, const Vec& x, const Vec& z,
                         double a, double b) {
    Scan& scan = tls_scan;
    scan.prepare(model, t, x, z);
    return scan.pair_value(model, t, x, a, b);
}

HamiltonianResult isaacs_infsup(const GameModel& model, double t, const Vec& x, const Vec& z) {
    const std::size_t na = model.control_grid_a.size();
    const std::size_t nb = model.control_grid_b.size();
    if (na == 0 || nb == 0) throw ModelError("isaacs_infsup: control grids must be non-empty");

    Scan& scan = tls_scan;
    scan.prepare(model, t, x, z);
    std::vector<double>& table = tls_table;
    table.resize(na * nb);
    for (std::size_t ia = 0; ia < na; ++ia) {
        const double a = model.control_grid_a[ia];
        for (std::size_t ib = 0; ib < nb; ++ib)
            table[ia * nb + ib] = scan.pair_value(model, t, x, a, model.control_grid_b[ib]);
    }

    HamiltonianResult r;
    // inf over a of sup over b, first index wins ties
    for (std::size_t ia = 0; ia < na; ++ia) {
        double row_max = table[ia * nb];
        for (std::size_t ib = 1; ib < nb; ++ib)
            if (table[ia * nb + ib] > row_max) row_max = table[ia * nb + ib];
        if (ia == 0 || row_max < r.value_infsup) {
            r.value_infsup = row_max;
            r.ustar_index = ia;
        }
    }
    // sup over b of inf over a
    for (std::size_t ib = 0; ib < nb; ++ib) {
        double col_min = table[ib];
        for (std::size_t ia = 1; ia < na; ++ia)
            if (table[ia * nb + ib] < col_min) col_min = table[ia * nb + ib];
        if (ib == 0 || col_min > r.value_supinf) r.value_supinf = col_min;
    }
    // v* attains the inner max at a = u*.
    r.vstar_index = 0;
    for (std::size_t ib = 1; ib < nb; ++ib)
        if (table[r.ustar_index * nb + ib] > table[r.ustar_index * nb + r.vstar_index])
            r.vstar_index = ib;

    r.gap = r.value_infsup - r.value_supinf;
    return r;
}

bool saddle_pointwise_check(const GameModel& model, double t, const Vec& x, const Vec& z,
                            const HamiltonianResult& result, double tolerance) {
    Scan& scan = tls_scan;
    scan.prepare(model, t, x, z);
    const double ustar = model.control_grid_a[result.ustar_index];
    const double vstar = model.control_grid_b[result.vstar_index];
    const double saddle = scan.pair_value(model, t, x, ustar, vstar);
    for (double b : model.control_grid_b)
        if (scan.pair_value(model, t, x, ustar, b) > saddle + tolerance) return false;
    for (double a : model.control_grid_a)
        if (scan.pair_value(model, t, x, a, vstar) < saddle - tolerance) return false;
    return true;
}

double isaacs_gap_audit(const GameModel& model, int sample_count, double z_radius,
                        std::uint64_t seed, double x_radius) {
    if (sample_count < 1) throw ModelError("isaacs_gap_audit: sample_count must be >= 1");
    return chunked_max(
        static_cast<std::size_t>(sample_count),
        [&](std::size_t i) {
            const auto id = static_cast<std::uint32_t>(i);
            const double t =
                model.horizon * uniform_at(seed, RngStream::IsaacsSamples, id, 0, 0);
            Vec x(model.dim), z(model.dim);
            for (int k = 0; k < model.dim; ++k) {
                x[k] = x_radius *
                       (2.0 * uniform_at(seed, RngStream::IsaacsSamples, id, 1,
                                         static_cast<std::uint32_t>(k)) -
                        1.0);
                z[k] = z_radius *
                       (2.0 * uniform_at(seed, RngStream::IsaacsSamples, id, 2,
                                         static_cast<std::uint32_t>(k)) -
                        1.0);
            }
            return isaacs_infsup(model, t, x, z).gap;
        },
        0.0);
}

void require_isaacs(const GameModel& model, const IsaacsPolicy& policy) {
    const double gap =
        isaacs_gap_audit(model, policy.sample_count, policy.z_radius, policy.seed,
                         policy.x_radius);
    if (gap > policy.gap_threshold)
        throw IsaacsError("Isaacs condition fails at the grid level (max gap " +
                              std::to_string(gap) + " > threshold " +
                              std::to_string(policy.gap_threshold) +
                              "); game solving refused for model '" + model.name + "'",
                          gap);
}

} // namespace mzsg
