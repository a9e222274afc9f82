#ifndef MZSG_CONFIG_HPP
#define MZSG_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mzsg/drbsde.hpp"
#include "mzsg/game.hpp"
#include "mzsg/model.hpp"

namespace mzsg {

enum class Task { Validate, SolveBsde, SolvePde, CrossCheck, SaddleAudit, TruncationAudit };

std::string task_name(Task t);

/// Declarative model description: either a registry name or an inline block
/// of coefficient families with numeric parameters.
struct ModelConfig {
    bool is_builtin = true;
    std::string builtin_name = "zero";

    struct Coefficient {
        std::string family;
        double value = 0.0;  // constant / offset
        double scale = 1.0;  // family-specific
        double rate = 1.0;
        double a_quad = 0.0;
        double b_quad = 0.0;
        double state_slope = 0.0;
    };
    int dimension = 1;
    double horizon = 1.0;
    Vec initial_state;
    double growth_constant = 1.0;
    double growth_exponent = 2.0;
    Coefficient diffusion, drift, running_cost, terminal, lower_obstacle, upper_obstacle;
    std::vector<double> control_grid_a, control_grid_b;
};

GameModel build_model(const ModelConfig& config);

struct RunConfig {
    std::uint64_t seed = 0;
    std::string out_dir = "out";
    std::vector<Task> tasks;
    ModelConfig model;

    struct Validate {
        int probe_count = 2000;
        double probe_radius = 10.0;
    } validate;

    struct Solver {
        int time_steps = 50;
        int path_count = 20000;
        RegressionBasis basis;
        GeneratorSpec generator;
        std::vector<int> n_list{1, 2, 5, 50};
        std::vector<int> m_list{1, 2, 5, 50};
        std::optional<RegressionBasis> truncation_basis;
    } solver;

    struct Pde {
        std::vector<double> space_min{-4.0};
        std::vector<double> space_max{4.0};
        std::vector<int> nodes{201};
    } pde;

    struct Game {
        double epsilon_stop = 0.05;
        double allowance = 0.03;
        std::string source = "bsde"; // or "pde"
        int path_count = 0;          // 0 -> solver.path_count
        std::vector<DeviationSpec> deviations;
        bool has_deviations = false;
    } game;

    bool dump_paths = false; // merged in from the CLI
};

/// Strict parse: unknown keys, wrong types and a missing seed are errors
/// naming the offending key.
RunConfig parse_config(const std::string& document);
RunConfig parse_config_file(const std::string& path);

/// Config echo used in the run manifest (canonical form, defaults filled).
std::string config_echo_json(const RunConfig& config);

} // namespace mzsg

#endif // MZSG_CONFIG_HPP
