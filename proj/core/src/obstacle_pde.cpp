#include "mzsg/obstacle_pde.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mzsg/parallel.hpp"

namespace mzsg {

namespace {

double ramp(double r, int k) {
    if (k < 0) return 1.0; // truncation disabled
    if (r <= k) return 1.0;
    if (r <= k + 1) return 1.0 + k - r;
    return 0.0;
}

struct Box {
    const SpaceGrid* g;
    int dim;
    int n0 = 1, n1 = 1;

    explicit Box(const SpaceGrid& grid) : g(&grid), dim(grid.dim()) {
        if (dim > 2)
            throw ModelError("obstacle_pde: only d <= 2 is supported");
        n0 = grid.nodes[0];
        if (dim == 2) n1 = grid.nodes[1];
    }

    std::size_t total() const { return static_cast<std::size_t>(n0) * n1; }
    void decode(std::size_t j, int& j0, int& j1) const {
        j0 = static_cast<int>(j % n0);
        j1 = static_cast<int>(j / n0);
    }
    std::size_t encode(int j0, int j1) const {
        return static_cast<std::size_t>(j1) * n0 + j0;
    }
    Vec coords(std::size_t j) const {
        int j0, j1;
        decode(j, j0, j1);
        Vec x(dim);
        x[0] = g->coord(0, j0);
        if (dim == 2) x[1] = g->coord(1, j1);
        return x;
    }
};

// Min-max over the control grids of the upwinded first-order part
//   sum_k f_k D_k u + Gamma,
// with D_k one-sided per the sign of f_k (inward at the box boundary).
double upwind_hamiltonian(const GameModel& model, const Box& box, const double* slice,
                          double t, const Vec& x, std::size_t j, int j0, int j1) {
    const double u_here = slice[j];
    const int d = box.dim;
    double fwd[2] = {0.0, 0.0}, bwd[2] = {0.0, 0.0};
    bool has_fwd[2] = {false, false}, has_bwd[2] = {false, false};
    {
        const double dx0 = box.g->spacing(0);
        if (j0 + 1 < box.n0) {
            fwd[0] = (slice[box.encode(j0 + 1, j1)] - u_here) / dx0;
            has_fwd[0] = true;
        }
        if (j0 > 0) {
            bwd[0] = (u_here - slice[box.encode(j0 - 1, j1)]) / dx0;
            has_bwd[0] = true;
        }
    }
    if (d == 2) {
        const double dx1 = box.g->spacing(1);
        if (j1 + 1 < box.n1) {
            fwd[1] = (slice[box.encode(j0, j1 + 1)] - u_here) / dx1;
            has_fwd[1] = true;
        }
        if (j1 > 0) {
            bwd[1] = (u_here - slice[box.encode(j0, j1 - 1)]) / dx1;
            has_bwd[1] = true;
        }
    }

    const auto& ga = model.control_grid_a;
    const auto& gb = model.control_grid_b;
    double best_a = 0.0;
    for (std::size_t ia = 0; ia < ga.size(); ++ia) {
        double best_b = 0.0;
        for (std::size_t ib = 0; ib < gb.size(); ++ib) {
            const Vec f = model.drift(t, x, ga[ia], gb[ib]);
            double adv = 0.0;
            for (int k = 0; k < d; ++k) {
                if (f[k] > 0.0)
                    adv += f[k] * (has_fwd[k] ? fwd[k] : bwd[k]);
                else if (f[k] < 0.0)
                    adv += f[k] * (has_bwd[k] ? bwd[k] : fwd[k]);
            }
            const double v = adv + model.running_cost(t, x, ga[ia], gb[ib]);
            if (ib == 0 || v > best_b) best_b = v;
        }
        if (ia == 0 || best_b < best_a) best_a = best_b;
    }
    return best_a;
}

double diffusion_term(const GameModel& model, const Box& box, const double* slice, double t,
                      const Vec& x, std::size_t j, int j0, int j1) {
    const Matrix sigma = model.diffusion(t, x);
    const Matrix a = sigma.times_transpose();
    const int d = box.dim;
    if (d == 2) {
        const double off = std::fabs(a(0, 1));
        if (off > 1e-12 * (std::fabs(a(0, 0)) + std::fabs(a(1, 1))))
            throw NumericsError(
                "obstacle_pde: d = 2 requires a diagonal sigma sigma* (cross terms are "
                "not supported)");
    }
    const double u_here = slice[j];
    double diff = 0.0;
    if (j0 > 0 && j0 + 1 < box.n0) {
        const double dx = box.g->spacing(0);
        diff += 0.5 * a(0, 0) *
                (slice[box.encode(j0 + 1, j1)] - 2.0 * u_here + slice[box.encode(j0 - 1, j1)]) /
                (dx * dx);
    }
    if (d == 2 && j1 > 0 && j1 + 1 < box.n1) {
        const double dx = box.g->spacing(1);
        diff += 0.5 * a(1, 1) *
                (slice[box.encode(j0, j1 + 1)] - 2.0 * u_here + slice[box.encode(j0, j1 - 1)]) /
                (dx * dx);
    }
    return diff;
}

struct StabilityScan {
    double dt_stable = 0.0;
    double max_a_diag = 0.0;
};

StabilityScan scan_stability(const GameModel& model, const TimeGrid& tgrid, const Box& box,
                             double safety) {
    const double probe_times[3] = {0.0, 0.5 * tgrid.horizon, tgrid.horizon};
    double worst = 0.0;
    double max_a = 0.0;
    for (double t : probe_times) {
        for (std::size_t j = 0; j < box.total(); ++j) {
            const Vec x = box.coords(j);
            const Matrix a = model.diffusion(t, x).times_transpose();
            double rate = 0.0;
            for (int k = 0; k < box.dim; ++k) {
                const double dx = box.g->spacing(k);
                rate += a(k, k) / (dx * dx);
                max_a = std::max(max_a, a(k, k));
            }
            double fmax = 0.0;
            for (double ca : model.control_grid_a)
                for (double cb : model.control_grid_b) {
                    const Vec f = model.drift(t, x, ca, cb);
                    double s = 0.0;
                    for (int k = 0; k < box.dim; ++k) s += std::fabs(f[k]) / box.g->spacing(k);
                    fmax = std::max(fmax, s);
                }
            worst = std::max(worst, rate + fmax);
        }
    }
    StabilityScan out;
    out.max_a_diag = max_a;
    out.dt_stable = worst > 0.0 ? safety / worst : tgrid.dt();
    return out;
}

ValueSurface solve_impl(const GameModel& model, const TimeGrid& tgrid, const SpaceGrid& sgrid,
                        int trunc_n, int trunc_m, const PdeOptions& options) {
    const Box box(sgrid);
    if (model.dim != box.dim) throw ModelError("obstacle_pde: model/grid dimension mismatch");
    if (options.audit_isaacs) require_isaacs(model, options.isaacs);

    const StabilityScan stab = scan_stability(model, tgrid, box, options.cfl_safety);
    const double dt_grid = tgrid.dt();
    const int substeps =
        std::max(1, static_cast<int>(std::ceil(dt_grid / std::max(stab.dt_stable, 1e-300))));
    if (substeps > options.max_substeps_per_interval)
        throw NumericsError("obstacle_pde: CFL condition needs " + std::to_string(substeps) +
                            " substeps per interval, above the configured budget");
    const double dt_sub = dt_grid / substeps;

    ValueSurface surf;
    surf.tgrid = tgrid;
    surf.sgrid = sgrid;
    surf.substeps_per_interval = substeps;
    surf.cfl_dt = dt_sub;
    const std::size_t nodes = box.total();
    surf.u.resize(static_cast<std::size_t>(tgrid.step_count + 1) * nodes);
    surf.contact.assign(surf.u.size(), static_cast<std::uint8_t>(Contact::Interior));

    // Domain margin diagnostic.
    for (int k = 0; k < box.dim; ++k) {
        const double margin = std::min(model.initial_state[k] - sgrid.lower[k],
                                       sgrid.upper[k] - model.initial_state[k]);
        const double needed = 4.0 * std::sqrt(tgrid.horizon * stab.max_a_diag);
        if (margin < needed)
            surf.warnings.push_back("spatial margin " + std::to_string(margin) + " in dim " +
                                    std::to_string(k) + " below recommended " +
                                    std::to_string(needed));
    }

    // Terminal slice, unprojected.
    double* terminal = &surf.u[static_cast<std::size_t>(tgrid.step_count) * nodes];
    parallel_for(nodes, [&](std::size_t j) {
        const double g = model.terminal(box.coords(j));
        if (!std::isfinite(g))
            throw NumericsError("obstacle_pde: terminal value non-finite at a grid node");
        terminal[j] = g;
    });

    std::vector<double> work_a(nodes), work_b(nodes);
    std::vector<std::uint8_t> mask(nodes);

    for (int i = tgrid.step_count - 1; i >= 0; --i) {
        const double t_right = tgrid.time(i + 1);
        std::copy_n(&surf.u[static_cast<std::size_t>(i + 1) * nodes], nodes, work_a.data());
        const double* src = work_a.data();
        double* dst = work_b.data();
        for (int s = 0; s < substeps; ++s) {
            const double t_src = t_right - s * dt_sub;
            const double t_dst = t_src - dt_sub;
            parallel_for(nodes, [&](std::size_t j) {
                int j0, j1;
                box.decode(j, j0, j1);
                const Vec x = box.coords(j);
                const double diff = diffusion_term(model, box, src, t_src, x, j, j0, j1);
                const double ham = upwind_hamiltonian(model, box, src, t_src, x, j, j0, j1);
                double gen = ham;
                if (trunc_n >= 0 || trunc_m >= 0) {
                    const double r = norm_2(x);
                    gen = ramp(r, trunc_n) * std::max(ham, 0.0) -
                          ramp(r, trunc_m) * std::max(-ham, 0.0);
                }
                double v = src[j] + dt_sub * (diff + gen);
                if (!std::isfinite(v))
                    throw NumericsError("obstacle_pde: non-finite update at t=" +
                                        std::to_string(t_dst));
                const double lo = model.lower_obstacle(t_dst, x);
                const double hi = model.upper_obstacle(t_dst, x);
                if (lo > hi)
                    throw NumericsError("obstacle_pde: obstacles cross (h > h') at a node");
                Contact c = Contact::Interior;
                if (v <= lo) {
                    v = lo;
                    c = Contact::Lower;
                } else if (v >= hi) {
                    v = hi;
                    c = Contact::Upper;
                }
                dst[j] = v;
                mask[j] = static_cast<std::uint8_t>(c);
            });
            std::swap(work_a, work_b);
            src = work_a.data();
            dst = work_b.data();
        }
        std::copy_n(work_a.data(), nodes, &surf.u[static_cast<std::size_t>(i) * nodes]);
        std::copy_n(mask.data(), nodes, &surf.contact[static_cast<std::size_t>(i) * nodes]);
    }
    return surf;
}

} // namespace

Vec ValueSurface::node_coords(std::size_t j) const { return Box(sgrid).coords(j); }

ValueSurface solve_double_obstacle_pde(const GameModel& model, const TimeGrid& tgrid,
                                       const SpaceGrid& sgrid, const PdeOptions& options) {
    return solve_impl(model, tgrid, sgrid, -1, -1, options);
}

ValueSurface truncated_pde_solve(const GameModel& model, const TimeGrid& tgrid,
                                 const SpaceGrid& sgrid, int n, int m,
                                 const PdeOptions& options) {
    if (n < 0 || m < 0) throw ModelError("truncated_pde_solve: n, m must be >= 0");
    return solve_impl(model, tgrid, sgrid, n, m, options);
}

double surface_value(const ValueSurface& surface, int i, const Vec& x) {
    const Box box(surface.sgrid);
    const double* slice = &surface.u[static_cast<std::size_t>(i) * box.total()];
    // cell + weights per dimension, clamped to the box
    int idx[2] = {0, 0};
    double w[2] = {0.0, 0.0};
    for (int k = 0; k < box.dim; ++k) {
        const double dx = surface.sgrid.spacing(k);
        const int n = surface.sgrid.nodes[k];
        double s = (x[k] - surface.sgrid.lower[k]) / dx;
        s = std::min(std::max(s, 0.0), static_cast<double>(n - 1));
        idx[k] = std::min(static_cast<int>(s), n - 2);
        w[k] = s - idx[k];
    }
    if (box.dim == 1)
        return (1.0 - w[0]) * slice[box.encode(idx[0], 0)] +
               w[0] * slice[box.encode(idx[0] + 1, 0)];
    const double v00 = slice[box.encode(idx[0], idx[1])];
    const double v10 = slice[box.encode(idx[0] + 1, idx[1])];
    const double v01 = slice[box.encode(idx[0], idx[1] + 1)];
    const double v11 = slice[box.encode(idx[0] + 1, idx[1] + 1)];
    return (1.0 - w[1]) * ((1.0 - w[0]) * v00 + w[0] * v10) +
           w[1] * ((1.0 - w[0]) * v01 + w[0] * v11);
}

namespace {

// Node-centered gradient component, central in the interior.
double node_gradient(const ValueSurface& surface, const Box& box, const double* slice, int k,
                     int j0, int j1) {
    const double dx = surface.sgrid.spacing(k);
    const int n = surface.sgrid.nodes[k];
    const int jk = (k == 0) ? j0 : j1;
    auto at = [&](int shift) {
        return (k == 0) ? slice[box.encode(jk + shift, j1)] : slice[box.encode(j0, jk + shift)];
    };
    if (jk == 0) return (at(1) - at(0)) / dx;
    if (jk == n - 1) return (at(0) - at(-1)) / dx;
    return (at(1) - at(-1)) / (2.0 * dx);
}

Vec gradient_at(const ValueSurface& surface, int i, const Vec& x) {
    const Box box(surface.sgrid);
    const double* slice = &surface.u[static_cast<std::size_t>(i) * box.total()];
    int idx[2] = {0, 0};
    double w[2] = {0.0, 0.0};
    for (int k = 0; k < box.dim; ++k) {
        const double dx = surface.sgrid.spacing(k);
        const int n = surface.sgrid.nodes[k];
        double s = (x[k] - surface.sgrid.lower[k]) / dx;
        s = std::min(std::max(s, 0.0), static_cast<double>(n - 1));
        idx[k] = std::min(static_cast<int>(s), n - 2);
        w[k] = s - idx[k];
    }
    Vec grad(box.dim, 0.0);
    for (int k = 0; k < box.dim; ++k) {
        if (box.dim == 1) {
            const double g0 = node_gradient(surface, box, slice, k, idx[0], 0);
            const double g1 = node_gradient(surface, box, slice, k, idx[0] + 1, 0);
            grad[k] = (1.0 - w[0]) * g0 + w[0] * g1;
        } else {
            const double g00 = node_gradient(surface, box, slice, k, idx[0], idx[1]);
            const double g10 = node_gradient(surface, box, slice, k, idx[0] + 1, idx[1]);
            const double g01 = node_gradient(surface, box, slice, k, idx[0], idx[1] + 1);
            const double g11 = node_gradient(surface, box, slice, k, idx[0] + 1, idx[1] + 1);
            grad[k] = (1.0 - w[1]) * ((1.0 - w[0]) * g00 + w[0] * g10) +
                      w[1] * ((1.0 - w[0]) * g01 + w[0] * g11);
        }
    }
    return grad;
}

} // namespace

Vec surface_z(const GameModel& model, const ValueSurface& surface, int i, const Vec& x) {
    const Vec grad = gradient_at(surface, i, x);
    const Matrix sigma = model.diffusion(surface.tgrid.time(i), x);
    return sigma.apply_transposed(grad);
}

ViscosityReport viscosity_residual_check(const GameModel& model, const ValueSurface& surface,
                                         const ViscosityToleranceSpec& spec) {
    const Box box(surface.sgrid);
    const std::size_t nodes = box.total();
    const int N = surface.tgrid.step_count;
    const double dt = surface.tgrid.dt();
    double dx_max = 0.0;
    for (int k = 0; k < box.dim; ++k) dx_max = std::max(dx_max, surface.sgrid.spacing(k));

    ViscosityReport rep;
    rep.tol = spec.c0 * (dt + dx_max);

    for (int i = 0; i < N; ++i) {
        const double t_here = surface.tgrid.time(i);
        const double t_right = surface.tgrid.time(i + 1);
        const double* here = &surface.u[static_cast<std::size_t>(i) * nodes];
        const double* right = &surface.u[static_cast<std::size_t>(i + 1) * nodes];
        for (std::size_t j = 0; j < nodes; ++j) {
            int j0, j1;
            box.decode(j, j0, j1);
            const Vec x = box.coords(j);
            const double residual =
                -(right[j] - here[j]) / dt -
                diffusion_term(model, box, right, t_right, x, j, j0, j1) -
                upwind_hamiltonian(model, box, right, t_right, x, j, j0, j1);
            const double lo = model.lower_obstacle(t_here, x);
            const double hi = model.upper_obstacle(t_here, x);
            const double u_here = here[j];
            const Contact c = surface.contact_at(i, j);

            bool spatial_interior = j0 > 0 && j0 + 1 < box.n0;
            if (box.dim == 2) spatial_interior = spatial_interior && j1 > 0 && j1 + 1 < box.n1;

            if (c == Contact::Interior) {
                if (!spatial_interior) continue;
                const double val =
                    std::fabs(std::min(u_here - lo, std::max(residual, u_here - hi)));
                if (val > rep.max_interior_abs) {
                    rep.max_interior_abs = val;
                    rep.worst_step = i;
                    rep.worst_node = j;
                }
            } else if (c == Contact::Lower) {
                rep.max_lower_eq = std::max(rep.max_lower_eq, std::fabs(u_here - lo));
                rep.max_lower_defect = std::max(
                    rep.max_lower_defect, -(std::max(residual, u_here - hi)) - rep.tol);
            } else {
                rep.max_upper_eq = std::max(rep.max_upper_eq, std::fabs(u_here - hi));
                rep.max_upper_defect = std::max(rep.max_upper_defect, residual - rep.tol);
            }
        }
    }
    rep.max_lower_defect = std::max(rep.max_lower_defect, 0.0);
    rep.max_upper_defect = std::max(rep.max_upper_defect, 0.0);
    rep.fitted_c = rep.max_interior_abs / (dt + dx_max);
    rep.passed = rep.max_interior_abs <= rep.tol && rep.max_lower_defect == 0.0 &&
                 rep.max_upper_defect == 0.0 && rep.max_lower_eq <= 1e-12 &&
                 rep.max_upper_eq <= 1e-12;
    return rep;
}

ValueSurface exp_change_of_variable(const ValueSurface& surface, ExpDirection direction) {
    ValueSurface out = surface;
    const std::size_t nodes = out.nodes();
    for (int i = 0; i <= out.tgrid.step_count; ++i) {
        const double t = out.tgrid.time(i);
        const double scale =
            direction == ExpDirection::Forward ? std::exp(t) : std::exp(-t);
        double* slice = &out.u[static_cast<std::size_t>(i) * nodes];
        for (std::size_t j = 0; j < nodes; ++j) slice[j] *= scale;
    }
    out.exp_scaled = direction == ExpDirection::Forward;
    return out;
}

CompareReport compare_pde_probabilistic(const ValueSurface& surface, const ValueProcess& vp,
                                        const GameModel& model, const CompareOptions& options) {
    for (int k = 0; k < model.dim; ++k)
        if (model.initial_state[k] < surface.sgrid.lower[k] ||
            model.initial_state[k] > surface.sgrid.upper[k])
            throw ModelError("compare_pde_probabilistic: x0 lies outside the spatial grid");

    CompareReport rep;
    rep.u_pde_x0 = surface_value(surface, 0, model.initial_state);
    rep.y0 = vp.y0_mean();
    rep.gap = std::fabs(rep.u_pde_x0 - rep.y0);

    // Sampling-noise proxy for the step-0 estimate: cross-path spread of the
    // step-1 values feeding the final regression.
    {
        const int M = vp.path_count;
        double mean = 0.0;
        for (int m = 0; m < M; ++m) mean += vp.Y(std::min(1, vp.grid.step_count), m);
        mean /= M;
        double var = 0.0;
        for (int m = 0; m < M; ++m) {
            const double d = vp.Y(std::min(1, vp.grid.step_count), m) - mean;
            var += d * d;
        }
        var /= std::max(1, M - 1);
        rep.mc_std_error = std::sqrt(var / M);
    }
    rep.combined_tolerance = options.grid_allowance + options.regression_allowance +
                             options.discretization_allowance + 3.0 * rep.mc_std_error;
    rep.flagged = rep.gap > rep.combined_tolerance;

    const int N = vp.grid.step_count;
    const Matrix a0 = model.diffusion(0.0, model.initial_state).times_transpose();
    for (double frac : options.probe_fractions) {
        const int i = std::min(N - 1, std::max(1, static_cast<int>(std::lround(frac * N))));
        const double t = vp.grid.time(i);
        const int i_pde = static_cast<int>(
            std::lround(t / surface.tgrid.horizon * surface.tgrid.step_count));
        for (double off : options.probe_offsets) {
            CompareReport::Probe p;
            p.t = t;
            p.x = model.initial_state;
            for (int k = 0; k < model.dim; ++k) {
                p.x[k] += off * std::sqrt(std::max(a0(k, k), 0.0) * t);
                p.x[k] = std::min(std::max(p.x[k], surface.sgrid.lower[k]),
                                  surface.sgrid.upper[k]);
            }
            p.u_pde = surface_value(surface, i_pde, p.x);
            p.y_regression = value_process_eval(model, vp, i, p.x);
            p.gap = std::fabs(p.u_pde - p.y_regression);
            rep.max_probe_gap = std::max(rep.max_probe_gap, p.gap);
            rep.probes.push_back(std::move(p));
        }
    }
    return rep;
}

double value_process_eval(const GameModel& model, const ValueProcess& vp, int step,
                          const Vec& x) {
    const int N = vp.grid.step_count;
    if (step < 0 || step > N) throw ModelError("value_process_eval: step out of range");
    if (step == N) return model.terminal(x);
    const double t = vp.grid.time(step);
    const Vec z = value_process_z(vp, step, x);
    const double cont = vp.fits[step].continuation->eval(x);
    const double gen = generator_value(model, vp.generator, t, x, z);
    const double lo = model.lower_obstacle(t, x);
    const double hi = model.upper_obstacle(t, x);
    return std::min(std::max(cont + gen * vp.grid.dt(), lo), hi);
}

Vec value_process_z(const ValueProcess& vp, int step, const Vec& x) {
    Vec z(vp.dim);
    for (int k = 0; k < vp.dim; ++k) z[k] = vp.fits[step].z[k]->eval(x);
    return z;
}

} // namespace mzsg
