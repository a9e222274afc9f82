#ifndef MZSG_GAME_HPP
#define MZSG_GAME_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mzsg/obstacle_pde.hpp"

namespace mzsg {

/// Barrier-hitting stopping rule, consulted at grid steps 0..N-1. At step N
/// the game ends with the terminal payoff regardless.
struct StopPolicy {
    std::function<bool(int, double, const Vec&)> fires;
    std::string label;
};

struct PlayerPolicy {
    ControlFeedback control;
    std::string label;
};

/// Saddle-point strategy package: Hamiltonian argmin/argmax feedback driven
/// by the z-estimate of a solved value source, plus the two barrier-hitting
/// stop rules with band epsilon_stop. The source must outlive the strategy.
class Strategy {
public:
    enum class Source { Process, Surface };

    Strategy(const GameModel& model, const ValueProcess& vp, double epsilon_stop);
    Strategy(const GameModel& model, const ValueSurface& surface, double epsilon_stop);

    /// Value estimate, z estimate and the optimizing control pair at one
    /// query point. Memoized per thread so the stop rules and both feedback
    /// controls of a simulation step share a single Hamiltonian scan.
    struct StepDecision {
        double value = 0.0;
        Vec z;
        std::size_t ustar_index = 0;
        std::size_t vstar_index = 0;
    };
    const StepDecision& decide(double t, const Vec& x) const;

    double value_at(double t, const Vec& x) const { return decide(t, x).value; }
    Vec z_at(double t, const Vec& x) const { return decide(t, x).z; }

    PlayerPolicy minimizer_control() const;
    PlayerPolicy maximizer_control() const;
    StopPolicy tau_rule() const;   // minimizer stops at the upper barrier
    StopPolicy sigma_rule() const; // maximizer stops at the lower barrier

    double initial_value() const { return y0_; }
    double epsilon_stop() const { return epsilon_stop_; }
    const GameModel& model() const { return *model_; }
    Source source() const { return source_; }

private:
    const GameModel* model_;
    Source source_;
    const ValueProcess* vp_ = nullptr;
    const ValueSurface* surface_ = nullptr;
    double epsilon_stop_;
    double y0_ = 0.0;

    int source_step(double t) const;
};

Strategy extract_strategy(const GameModel& model, const ValueProcess& vp, double epsilon_stop);
Strategy extract_strategy(const GameModel& model, const ValueSurface& surface,
                          double epsilon_stop);

/// Controlled paths under a strategy's feedback pair (ignores its stop rules).
PathBundle simulate_controlled(const GameModel& model, const TimeGrid& grid,
                               const Strategy& strategy, int path_count, std::uint64_t seed);

/// Monte Carlo estimate of the game payoff under a control/stopping
/// quadruple. The decomposition means sum to the total mean exactly.
struct PayoffEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    int path_count = 0;
    double confidence_level = 0.99;
    double running_mean = 0.0;
    double upper_mean = 0.0;
    double lower_mean = 0.0;
    double terminal_mean = 0.0;
};

/// Simulates controlled paths under the two feedback controls, stops at the
/// first firing rule (simultaneous firing pays the lower obstacle), and
/// accumulates the running cost up to the stop.
PayoffEstimate evaluate_payoff(const GameModel& model, const PlayerPolicy& control_a,
                               const StopPolicy& stop_a, const PlayerPolicy& control_b,
                               const StopPolicy& stop_b, const TimeGrid& grid, int path_count,
                               std::uint64_t seed, std::vector<double>* per_path = nullptr);

struct DeviationSpec {
    enum class Player { Minimizer, Maximizer };
    enum class ControlKind { Same, Constant, RandomFeedback };
    enum class StopKind { Same, Never, FixedStep, BandShift };

    Player player = Player::Minimizer;
    ControlKind control = ControlKind::Same;
    std::size_t control_index = 0;
    StopKind stop = StopKind::Same;
    int fixed_step = 0;
    double band_shift = 0.0;

    std::string label() const;
};

/// The default deviation battery: constant controls at both grid ends and
/// the midpoint, a random-feedback control, an immediate stop, a mid-horizon
/// stop and a widened stop band, for each player.
std::vector<DeviationSpec> standard_deviations(const GameModel& model);

struct SaddleAuditRow {
    std::string label;
    double mean = 0.0;
    double std_error = 0.0;
    double improvement = 0.0;    // > 0 means the deviation helped its player
    double improvement_se = 0.0; // std error of the paired difference
    bool violation = false;
};

struct SaddleAuditReport {
    double y0 = 0.0;
    PayoffEstimate saddle;
    double y0_gap = 0.0;
    bool y0_flag = false;
    double allowance = 0.0;
    std::vector<SaddleAuditRow> rows;
    bool any_violation = false;
};

/// Estimates J at the saddle quadruple and at every unilateral deviation
/// with common random numbers; flags statistically significant violations
/// of the saddle inequalities (beyond 3 paired standard errors plus the
/// declared discretization allowance).
SaddleAuditReport saddle_audit(const GameModel& model, const Strategy& strategy,
                               const std::vector<DeviationSpec>& deviations,
                               const TimeGrid& grid, int path_count, std::uint64_t seed,
                               double allowance = 0.03);

} // namespace mzsg

#endif // MZSG_GAME_HPP
