#include "mzsg/drbsde.hpp"

#include <algorithm>
#include <cmath>

#include "mzsg/parallel.hpp"

namespace mzsg {

std::string GeneratorSpec::tag() const {
    switch (kind) {
        case Kind::Zero: return "0";
        case Kind::HStar: return "hstar";
        case Kind::TruncatedHStar:
            return "hstar_trunc(n=" + std::to_string(n) + ",m=" + std::to_string(m) + ")";
        case Kind::Phi: return "phi";
        case Kind::TruncatedPhi: return "phi_trunc(n=" + std::to_string(n) + ")";
    }
    return "?";
}

double phi_generator(double /*t*/, double x_norm, const Vec& z, double C, double p) {
    return C * (1.0 + x_norm) * norm_2(z) + C * (1.0 + std::pow(x_norm, p));
}

double truncated_phi(double /*t*/, double x_norm, const Vec& z, double C, double p, int n) {
    const double coef = std::min(C * (1.0 + x_norm), static_cast<double>(n));
    return coef * norm_2(z) + C * (1.0 + std::pow(x_norm, p));
}

double truncated_hamiltonian(const GameModel& model, double t, const Vec& x, const Vec& z,
                             int n, int m) {
    const double xn = norm_2(x);
    if (xn > n && xn > m) return 0.0;
    const double h = isaacs_infsup(model, t, x, z).value_infsup;
    const double pos = std::max(h, 0.0);
    const double neg = std::max(-h, 0.0);
    return (xn <= n ? pos : 0.0) - (xn <= m ? neg : 0.0);
}

double generator_value(const GameModel& model, const GeneratorSpec& gen, double t, const Vec& x,
                       const Vec& z) {
    switch (gen.kind) {
        case GeneratorSpec::Kind::Zero:
            return 0.0;
        case GeneratorSpec::Kind::HStar:
            return isaacs_infsup(model, t, x, z).value_infsup;
        case GeneratorSpec::Kind::TruncatedHStar:
            return truncated_hamiltonian(model, t, x, z, gen.n, gen.m);
        case GeneratorSpec::Kind::Phi:
            return phi_generator(t, norm_2(x), z, model.growth_constant, model.growth_exponent);
        case GeneratorSpec::Kind::TruncatedPhi:
            return truncated_phi(t, norm_2(x), z, model.growth_constant, model.growth_exponent,
                                 gen.n);
    }
    return 0.0;
}

double ValueProcess::y0_mean() const {
    double s = 0.0;
    for (int m = 0; m < path_count; ++m) s += Y(0, m);
    return s / path_count;
}

ValueProcess solve_drbsde(const GameModel& model, const PathBundle& bundle,
                          const RegressionBasis& basis, const GeneratorSpec& generator,
                          const DrbsdeOptions& options) {
    if (bundle.controlled)
        throw ModelError("solve_drbsde: bundle must be uncontrolled");
    const bool needs_isaacs = generator.kind == GeneratorSpec::Kind::HStar ||
                              generator.kind == GeneratorSpec::Kind::TruncatedHStar;
    if (needs_isaacs && options.audit_isaacs) require_isaacs(model, options.isaacs);

    const int N = bundle.grid.step_count;
    const int M = bundle.path_count;
    const int d = bundle.dim;
    const double dt = bundle.grid.dt();

    ValueProcess vp;
    vp.grid = bundle.grid;
    vp.path_count = M;
    vp.dim = d;
    vp.basis = basis;
    vp.generator = generator;
    vp.y.resize(static_cast<std::size_t>(N + 1) * M);
    vp.z.assign(static_cast<std::size_t>(N) * M * d, 0.0);
    vp.dk_plus.assign(static_cast<std::size_t>(N) * M, 0.0);
    vp.dk_minus.assign(static_cast<std::size_t>(N) * M, 0.0);
    vp.fits.resize(N);

    // Terminal condition, unclamped.
    parallel_for(static_cast<std::size_t>(M), [&](std::size_t m) {
        const double g = model.terminal(bundle.state_vec(static_cast<int>(m), N));
        if (!std::isfinite(g))
            throw NumericsError("solve_drbsde: terminal value non-finite on path " +
                                std::to_string(m));
        vp.y[static_cast<std::size_t>(N) * M + m] = g;
    });

    std::vector<double> response(M);
    std::vector<double> fitted_z; // reused
    std::vector<std::vector<double>> zvals(d);
    std::vector<double> cont(M);

    for (int i = N - 1; i >= 0; --i) {
        const double t = bundle.grid.time(i);
        const std::string label = "step " + std::to_string(i);
        StepRegression reg(basis, bundle, i, label);
        StepFits fits;
        fits.z.resize(d);

        const double* y_next = &vp.y[static_cast<std::size_t>(i + 1) * M];

        // (a) Z by projecting Y_{i+1} dB_i / dt on the basis.
        for (int k = 0; k < d; ++k) {
            for (int m = 0; m < M; ++m)
                response[m] = y_next[m] * bundle.increment(m, i, k) / dt;
            fits.z[k] = reg.fit(response, &fitted_z);
            for (int m = 0; m < M; ++m)
                vp.z[(static_cast<std::size_t>(i) * M + m) * d + k] = fitted_z[m];
        }

        // (b) Continuation value.
        for (int m = 0; m < M; ++m) response[m] = y_next[m];
        fits.continuation = reg.fit(response, &cont);

        // (c)-(d) Driver step then reflection; K increments are the residuals.
        double* y_now = &vp.y[static_cast<std::size_t>(i) * M];
        parallel_for(static_cast<std::size_t>(M), [&](std::size_t m) {
            const Vec x = bundle.state_vec(static_cast<int>(m), i);
            Vec zv(d);
            for (int k = 0; k < d; ++k)
                zv[k] = vp.z[(static_cast<std::size_t>(i) * M + m) * d + k];
            const double gval = generator_value(model, generator, t, x, zv);
            const double y_tilde = cont[m] + gval * dt;
            if (!std::isfinite(y_tilde))
                throw NumericsError("solve_drbsde: non-finite driver value at step " +
                                    std::to_string(i) + ", path " + std::to_string(m));
            const double lo = model.lower_obstacle(t, x);
            const double hi = model.upper_obstacle(t, x);
            if (lo > hi)
                throw NumericsError("solve_drbsde: obstacles cross (h > h') at step " +
                                    std::to_string(i) + ", path " + std::to_string(m));
            double yv = y_tilde;
            if (y_tilde < lo) {
                yv = lo;
                vp.dk_plus[static_cast<std::size_t>(i) * M + m] = lo - y_tilde;
            } else if (y_tilde > hi) {
                yv = hi;
                vp.dk_minus[static_cast<std::size_t>(i) * M + m] = y_tilde - hi;
            }
            y_now[m] = yv;
        });

        vp.fits[i] = std::move(fits);
    }
    return vp;
}

ValueProcessCheck check_value_process(const GameModel& model, const PathBundle& bundle,
                                      const ValueProcess& vp, double tol_barrier) {
    const int N = vp.grid.step_count;
    const int M = vp.path_count;
    ValueProcessCheck out;
    out.tol_barrier = tol_barrier;

    for (int i = 0; i <= N; ++i) {
        const double t = vp.grid.time(i);
        for (int m = 0; m < M; ++m) {
            const Vec x = bundle.state_vec(m, i);
            const double lo = model.lower_obstacle(t, x);
            const double hi = model.upper_obstacle(t, x);
            const double yv = vp.Y(i, m);
            out.max_lower_breach = std::max(out.max_lower_breach, lo - yv);
            out.max_upper_breach = std::max(out.max_upper_breach, yv - hi);
            if (i < N) {
                const double kp = vp.dKplus(i, m);
                const double km = vp.dKminus(i, m);
                if (kp < 0.0 || km < 0.0)
                    throw NumericsError("check_value_process: negative reflection increment");
                if (kp > 0.0 && km > 0.0)
                    throw NumericsError(
                        "check_value_process: both reflections active at one point");
            }
        }
    }
    if (out.max_lower_breach > tol_barrier || out.max_upper_breach > tol_barrier)
        throw NumericsError("check_value_process: barrier sandwich violated (lower " +
                            std::to_string(out.max_lower_breach) + ", upper " +
                            std::to_string(out.max_upper_breach) + ")");

    // Discrete complementarity per path.
    for (int m = 0; m < M; ++m) {
        double sum_plus = 0.0, sum_minus = 0.0, total_variation = 0.0;
        for (int i = 0; i < N; ++i) {
            const double t = vp.grid.time(i);
            const Vec x = bundle.state_vec(m, i);
            sum_plus += (vp.Y(i, m) - model.lower_obstacle(t, x)) * vp.dKplus(i, m);
            sum_minus += (model.upper_obstacle(t, x) - vp.Y(i, m)) * vp.dKminus(i, m);
            total_variation += vp.dKplus(i, m) + vp.dKminus(i, m);
        }
        const double eps_comp = 1e-6 * total_variation;
        const double worst = std::max(sum_plus, sum_minus);
        out.max_complementarity = std::max(out.max_complementarity, worst);
        if (worst > eps_comp)
            throw NumericsError("check_value_process: complementarity sum " +
                                std::to_string(worst) + " exceeds eps_comp on path " +
                                std::to_string(m));
    }
    return out;
}

MonotonicityReport monotonicity_audit(const GameModel& model, const PathBundle& bundle,
                                      const RegressionBasis& basis, std::vector<int> n_list,
                                      std::vector<int> m_list, const DrbsdeOptions& options) {
    std::sort(n_list.begin(), n_list.end());
    n_list.erase(std::unique(n_list.begin(), n_list.end()), n_list.end());
    std::sort(m_list.begin(), m_list.end());
    m_list.erase(std::unique(m_list.begin(), m_list.end()), m_list.end());
    if (n_list.empty() || m_list.empty())
        throw ModelError("monotonicity_audit: truncation lists must be non-empty");

    const int N = bundle.grid.step_count;
    const int M = bundle.path_count;
    const std::size_t cells = static_cast<std::size_t>(N + 1) * M;

    MonotonicityReport report;
    const std::size_t nn = n_list.size(), nm = m_list.size();
    std::vector<std::vector<double>> ys(nn * nm);

    DrbsdeOptions solve_options = options;
    for (std::size_t a = 0; a < nn; ++a)
        for (std::size_t b = 0; b < nm; ++b) {
            GeneratorSpec gen{GeneratorSpec::Kind::TruncatedHStar, n_list[a], m_list[b]};
            ValueProcess vp = solve_drbsde(model, bundle, basis, gen, solve_options);
            solve_options.audit_isaacs = false; // one audit is enough per call
            ys[a * nm + b] = std::move(vp.y);
            report.solves.push_back({n_list[a], m_list[b],
                                     [&] {
                                         double s = 0.0;
                                         for (int m = 0; m < M; ++m)
                                             s += ys[a * nm + b][m];
                                         return s / M;
                                     }()});
        }

    ValueProcess vp_phi =
        solve_drbsde(model, bundle, basis, GeneratorSpec{GeneratorSpec::Kind::Phi, 0, 0},
                     solve_options);
    {
        double s = 0.0;
        for (int m = 0; m < M; ++m) s += vp_phi.y[m];
        report.phi_y0 = s / M;
    }

    auto scan = [&](const std::vector<double>& low, const std::vector<double>& high,
                    double& worst) {
        for (std::size_t c = 0; c < cells; ++c) {
            const double v = low[c] - high[c];
            if (v > worst) {
                worst = v;
                report.worst_step = static_cast<int>(c / M);
                report.worst_path = static_cast<int>(c % M);
            }
        }
    };

    for (std::size_t b = 0; b < nm; ++b)
        for (std::size_t a = 0; a + 1 < nn; ++a)
            scan(ys[a * nm + b], ys[(a + 1) * nm + b], report.max_violation_n);
    for (std::size_t a = 0; a < nn; ++a)
        for (std::size_t b = 0; b + 1 < nm; ++b)
            scan(ys[a * nm + b + 1], ys[a * nm + b], report.max_violation_m);
    for (std::size_t s = 0; s < ys.size(); ++s)
        scan(ys[s], vp_phi.y, report.max_violation_phi);

    return report;
}

} // namespace mzsg
