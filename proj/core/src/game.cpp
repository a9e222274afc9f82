#include "mzsg/game.hpp"

#include <cmath>
#include <cstring>

#include "mzsg/parallel.hpp"
#include "mzsg/rng.hpp"

namespace mzsg {

Strategy::Strategy(const GameModel& model, const ValueProcess& vp, double epsilon_stop)
    : model_(&model), source_(Source::Process), vp_(&vp), epsilon_stop_(epsilon_stop) {
    if (!(epsilon_stop > 0.0)) throw ModelError("Strategy: epsilon_stop must be > 0");
    if (vp.dim != model.dim) throw ModelError("Strategy: value source/model mismatch");
    y0_ = vp.y0_mean();
}

Strategy::Strategy(const GameModel& model, const ValueSurface& surface, double epsilon_stop)
    : model_(&model), source_(Source::Surface), surface_(&surface),
      epsilon_stop_(epsilon_stop) {
    if (!(epsilon_stop > 0.0)) throw ModelError("Strategy: epsilon_stop must be > 0");
    if (surface.sgrid.dim() != model.dim)
        throw ModelError("Strategy: value source/model mismatch");
    y0_ = surface_value(surface, 0, model.initial_state);
}

int Strategy::source_step(double t) const {
    const TimeGrid& g = source_ == Source::Process ? vp_->grid : surface_->tgrid;
    const int i = static_cast<int>(std::lround(t / g.horizon * g.step_count));
    return std::min(std::max(i, 0), g.step_count);
}

namespace {

struct DecisionCache {
    const void* owner = nullptr;
    int step = -1;
    Vec x;
    Strategy::StepDecision decision;
};

thread_local DecisionCache tls_decision;

} // namespace

const Strategy::StepDecision& Strategy::decide(double t, const Vec& x) const {
    const int step = source_step(t);
    DecisionCache& cache = tls_decision;
    if (cache.owner == this && cache.step == step && cache.x == x) return cache.decision;
    cache.owner = this;
    cache.step = step;
    cache.x = x;

    StepDecision& d = cache.decision;
    if (source_ == Source::Process) {
        const int N = vp_->grid.step_count;
        const int zstep = std::min(step, N - 1);
        d.z = value_process_z(*vp_, zstep, x);
        const double t_src = vp_->grid.time(step);
        const HamiltonianResult h = isaacs_infsup(*model_, t_src, x, d.z);
        d.ustar_index = h.ustar_index;
        d.vstar_index = h.vstar_index;
        if (step == N) {
            d.value = model_->terminal(x);
        } else {
            const double cont = vp_->fits[step].continuation->eval(x);
            const double gen = vp_->generator.kind == GeneratorSpec::Kind::HStar
                                   ? h.value_infsup
                                   : generator_value(*model_, vp_->generator, t_src, x, d.z);
            const double lo = model_->lower_obstacle(t_src, x);
            const double hi = model_->upper_obstacle(t_src, x);
            d.value = std::min(std::max(cont + gen * vp_->grid.dt(), lo), hi);
        }
    } else {
        const double t_src = surface_->tgrid.time(step);
        d.value = surface_value(*surface_, step, x);
        d.z = surface_z(*model_, *surface_, step, x);
        const HamiltonianResult h = isaacs_infsup(*model_, t_src, x, d.z);
        d.ustar_index = h.ustar_index;
        d.vstar_index = h.vstar_index;
    }
    return cache.decision;
}

PlayerPolicy Strategy::minimizer_control() const {
    const Strategy* self = this;
    return {[self](int, double t, const Vec& x) { return self->decide(t, x).ustar_index; },
            "u*"};
}

PlayerPolicy Strategy::maximizer_control() const {
    const Strategy* self = this;
    return {[self](int, double t, const Vec& x) { return self->decide(t, x).vstar_index; },
            "v*"};
}

StopPolicy Strategy::tau_rule() const {
    const Strategy* self = this;
    return {[self](int, double t, const Vec& x) {
                return self->decide(t, x).value >=
                       self->model_->upper_obstacle(t, x) - self->epsilon_stop_;
            },
            "tau*"};
}

StopPolicy Strategy::sigma_rule() const {
    const Strategy* self = this;
    return {[self](int, double t, const Vec& x) {
                return self->decide(t, x).value <=
                       self->model_->lower_obstacle(t, x) + self->epsilon_stop_;
            },
            "sigma*"};
}

Strategy extract_strategy(const GameModel& model, const ValueProcess& vp, double epsilon_stop) {
    return Strategy(model, vp, epsilon_stop);
}

Strategy extract_strategy(const GameModel& model, const ValueSurface& surface,
                          double epsilon_stop) {
    return Strategy(model, surface, epsilon_stop);
}

PathBundle simulate_controlled(const GameModel& model, const TimeGrid& grid,
                               const Strategy& strategy, int path_count, std::uint64_t seed) {
    return simulate_controlled(model, grid, strategy.minimizer_control().control,
                               strategy.maximizer_control().control, path_count, seed);
}

PayoffEstimate evaluate_payoff(const GameModel& model, const PlayerPolicy& control_a,
                               const StopPolicy& stop_a, const PlayerPolicy& control_b,
                               const StopPolicy& stop_b, const TimeGrid& grid, int path_count,
                               std::uint64_t seed, std::vector<double>* per_path) {
    if (path_count < 1) throw ModelError("evaluate_payoff: path_count must be >= 1");
    const int N = grid.step_count;
    const int d = model.dim;
    const double dt = grid.dt();
    const double sqrt_dt = std::sqrt(dt);

    std::vector<double> running(path_count, 0.0), upper(path_count, 0.0),
        lower(path_count, 0.0), term(path_count, 0.0);

    parallel_for(static_cast<std::size_t>(path_count), [&](std::size_t mp) {
        const int m = static_cast<int>(mp);
        Vec x = model.initial_state;
        Vec dB(d);
        bool stopped = false;
        for (int i = 0; i < N && !stopped; ++i) {
            const double t = grid.time(i);
            // Stop rules first; simultaneous firing pays the lower obstacle.
            const bool tau_fires = stop_a.fires && stop_a.fires(i, t, x);
            const bool sigma_fires = stop_b.fires && stop_b.fires(i, t, x);
            if (sigma_fires) {
                lower[m] = model.lower_obstacle(t, x);
                stopped = true;
                break;
            }
            if (tau_fires) {
                upper[m] = model.upper_obstacle(t, x);
                stopped = true;
                break;
            }
            const std::size_t ia = control_a.control(i, t, x);
            const std::size_t ib = control_b.control(i, t, x);
            const double a = model.control_grid_a.at(ia);
            const double b = model.control_grid_b.at(ib);
            running[m] += model.running_cost(t, x, a, b) * dt;

            normal_fill(seed, RngStream::Increments, static_cast<std::uint32_t>(m),
                        static_cast<std::uint32_t>(i), dB.data(), d);
            const Vec f = model.drift(t, x, a, b);
            const Matrix sigma = model.diffusion(t, x);
            Vec scaled(d);
            for (int k = 0; k < d; ++k) scaled[k] = dB[k] * sqrt_dt;
            const Vec noise = sigma.apply(scaled);
            for (int k = 0; k < d; ++k) x[k] += f[k] * dt + noise[k];
            if (!all_finite(x))
                throw NumericsError("evaluate_payoff: state overflow on path " +
                                    std::to_string(m));
        }
        if (!stopped) term[m] = model.terminal(x);
    });

    PayoffEstimate est;
    est.path_count = path_count;
    const auto n = static_cast<std::size_t>(path_count);
    est.running_mean = chunked_sum(n, [&](std::size_t m) { return running[m]; }) / path_count;
    est.upper_mean = chunked_sum(n, [&](std::size_t m) { return upper[m]; }) / path_count;
    est.lower_mean = chunked_sum(n, [&](std::size_t m) { return lower[m]; }) / path_count;
    est.terminal_mean = chunked_sum(n, [&](std::size_t m) { return term[m]; }) / path_count;
    est.mean = est.running_mean + est.upper_mean + est.lower_mean + est.terminal_mean;

    auto total = [&](std::size_t m) { return running[m] + upper[m] + lower[m] + term[m]; };
    const double sum_sq = chunked_sum(n, [&](std::size_t m) {
        const double v = total(m) - est.mean;
        return v * v;
    });
    est.std_error =
        path_count > 1 ? std::sqrt(sum_sq / (path_count - 1) / path_count) : 0.0;

    if (per_path) {
        per_path->resize(path_count);
        for (int m = 0; m < path_count; ++m) (*per_path)[m] = total(m);
    }
    return est;
}

std::string DeviationSpec::label() const {
    const bool is_min = player == Player::Minimizer;
    std::string s = is_min ? "min:" : "max:";
    const char* c = is_min ? "u" : "v";
    switch (control) {
        case ControlKind::Same: s += std::string(c) + "=*"; break;
        case ControlKind::Constant:
            s += std::string(c) + "=const[" + std::to_string(control_index) + "]";
            break;
        case ControlKind::RandomFeedback: s += std::string(c) + "=random"; break;
    }
    switch (stop) {
        case StopKind::Same: s += ",stop=*"; break;
        case StopKind::Never: s += ",stop=never"; break;
        case StopKind::FixedStep: s += ",stop=step" + std::to_string(fixed_step); break;
        case StopKind::BandShift: s += ",stop=band+" + std::to_string(band_shift); break;
    }
    return s;
}

std::vector<DeviationSpec> standard_deviations(const GameModel& model) {
    std::vector<DeviationSpec> devs;
    using P = DeviationSpec::Player;
    using C = DeviationSpec::ControlKind;
    using S = DeviationSpec::StopKind;
    const std::size_t last_a = model.control_grid_a.size() - 1;
    const std::size_t last_b = model.control_grid_b.size() - 1;
    devs.push_back({P::Minimizer, C::Constant, 0, S::Same, 0, 0.0});
    devs.push_back({P::Minimizer, C::Constant, last_a, S::Same, 0, 0.0});
    devs.push_back({P::Minimizer, C::RandomFeedback, 0, S::Same, 0, 0.0});
    devs.push_back({P::Minimizer, C::Same, 0, S::FixedStep, 0, 0.0});
    devs.push_back({P::Minimizer, C::Same, 0, S::BandShift, 0, 0.1});
    devs.push_back({P::Maximizer, C::Constant, 0, S::Same, 0, 0.0});
    devs.push_back({P::Maximizer, C::Constant, last_b, S::Same, 0, 0.0});
    devs.push_back({P::Maximizer, C::RandomFeedback, 0, S::Same, 0, 0.0});
    devs.push_back({P::Maximizer, C::Same, 0, S::FixedStep, 0, 0.0});
    devs.push_back({P::Maximizer, C::Same, 0, S::BandShift, 0, 0.1});
    return devs;
}

namespace {

std::size_t hashed_index(int step, const Vec& x, std::size_t grid_size) {
    std::uint64_t h = 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(step);
    for (double v : x) {
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(v));
        std::memcpy(&bits, &v, sizeof(bits));
        h ^= bits + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h % grid_size);
}

PlayerPolicy deviation_control(const DeviationSpec& dev, const Strategy& strategy,
                               const GameModel& model) {
    const bool is_min = dev.player == DeviationSpec::Player::Minimizer;
    switch (dev.control) {
        case DeviationSpec::ControlKind::Same:
            return is_min ? strategy.minimizer_control() : strategy.maximizer_control();
        case DeviationSpec::ControlKind::Constant: {
            const std::size_t n =
                is_min ? model.control_grid_a.size() : model.control_grid_b.size();
            if (dev.control_index >= n)
                throw ModelError("deviation control index out of range");
            return {constant_control(dev.control_index), dev.label()};
        }
        case DeviationSpec::ControlKind::RandomFeedback: {
            const std::size_t n =
                is_min ? model.control_grid_a.size() : model.control_grid_b.size();
            return {[n](int step, double, const Vec& x) { return hashed_index(step, x, n); },
                    dev.label()};
        }
    }
    throw ModelError("unreachable");
}

StopPolicy deviation_stop(const DeviationSpec& dev, const Strategy& strategy,
                          const GameModel& model) {
    const bool is_min = dev.player == DeviationSpec::Player::Minimizer;
    switch (dev.stop) {
        case DeviationSpec::StopKind::Same:
            return is_min ? strategy.tau_rule() : strategy.sigma_rule();
        case DeviationSpec::StopKind::Never:
            return {[](int, double, const Vec&) { return false; }, dev.label()};
        case DeviationSpec::StopKind::FixedStep: {
            const int k = dev.fixed_step;
            return {[k](int step, double, const Vec&) { return step >= k; }, dev.label()};
        }
        case DeviationSpec::StopKind::BandShift: {
            const double band = std::max(strategy.epsilon_stop() + dev.band_shift, 1e-12);
            const Strategy* s = &strategy;
            if (is_min)
                return {[s, band, &model](int, double t, const Vec& x) {
                            return s->value_at(t, x) >= model.upper_obstacle(t, x) - band;
                        },
                        dev.label()};
            return {[s, band, &model](int, double t, const Vec& x) {
                        return s->value_at(t, x) <= model.lower_obstacle(t, x) + band;
                    },
                    dev.label()};
        }
    }
    throw ModelError("unreachable");
}

} // namespace

SaddleAuditReport saddle_audit(const GameModel& model, const Strategy& strategy,
                               const std::vector<DeviationSpec>& deviations,
                               const TimeGrid& grid, int path_count, std::uint64_t seed,
                               double allowance) {
    SaddleAuditReport report;
    report.allowance = allowance;
    report.y0 = strategy.initial_value();

    const PlayerPolicy ustar = strategy.minimizer_control();
    const PlayerPolicy vstar = strategy.maximizer_control();
    const StopPolicy tau = strategy.tau_rule();
    const StopPolicy sigma = strategy.sigma_rule();

    std::vector<double> saddle_paths;
    report.saddle = evaluate_payoff(model, ustar, tau, vstar, sigma, grid, path_count, seed,
                                    &saddle_paths);
    report.y0_gap = std::fabs(report.saddle.mean - report.y0);
    report.y0_flag = report.y0_gap > 3.0 * report.saddle.std_error + allowance;

    std::vector<double> dev_paths;
    for (const DeviationSpec& dev : deviations) {
        const bool is_min = dev.player == DeviationSpec::Player::Minimizer;
        const PlayerPolicy control = deviation_control(dev, strategy, model);
        const StopPolicy stop = deviation_stop(dev, strategy, model);

        PayoffEstimate est =
            is_min ? evaluate_payoff(model, control, stop, vstar, sigma, grid, path_count,
                                     seed, &dev_paths)
                   : evaluate_payoff(model, ustar, tau, control, stop, grid, path_count, seed,
                                     &dev_paths);

        SaddleAuditRow row;
        row.label = dev.label();
        row.mean = est.mean;
        row.std_error = est.std_error;
        // Paired difference under common random numbers.
        double diff_mean = 0.0;
        for (int m = 0; m < path_count; ++m) diff_mean += dev_paths[m] - saddle_paths[m];
        diff_mean /= path_count;
        double diff_var = 0.0;
        for (int m = 0; m < path_count; ++m) {
            const double v = (dev_paths[m] - saddle_paths[m]) - diff_mean;
            diff_var += v * v;
        }
        diff_var /= std::max(1, path_count - 1);
        row.improvement_se = std::sqrt(diff_var / path_count);
        row.improvement = is_min ? -diff_mean : diff_mean;
        row.violation = row.improvement > 3.0 * row.improvement_se + allowance;
        report.any_violation = report.any_violation || row.violation;
        report.rows.push_back(std::move(row));
    }
    return report;
}

} // namespace mzsg
