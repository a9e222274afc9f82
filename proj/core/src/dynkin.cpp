#include "mzsg/dynkin.hpp"

#include <cmath>
#include <string>

namespace mzsg {

namespace {

void check_rows(const std::vector<std::vector<double>>& rows, int levels, const char* what) {
    if (static_cast<int>(rows.size()) != levels)
        throw ModelError(std::string("dynkin_oracle: ") + what + " must have one row per level");
    for (int j = 0; j < levels; ++j)
        if (static_cast<int>(rows[j].size()) != j + 1)
            throw ModelError(std::string("dynkin_oracle: ") + what + " row " +
                             std::to_string(j) + " must have " + std::to_string(j + 1) +
                             " entries");
}

} // namespace

double dynkin_oracle(const BinomialTreeSpec& tree) {
    if (tree.levels < 1 || tree.levels > 12)
        throw ModelError("dynkin_oracle: levels must be in [1, 12]");
    if (!(tree.dt > 0.0)) throw ModelError("dynkin_oracle: dt must be positive");
    check_rows(tree.driver, tree.levels, "driver");
    check_rows(tree.lower, tree.levels, "lower");
    check_rows(tree.upper, tree.levels, "upper");
    if (static_cast<int>(tree.terminal.size()) != tree.levels + 1)
        throw ModelError("dynkin_oracle: terminal must have levels+1 entries");

    std::vector<double> v = tree.terminal;
    for (int j = tree.levels - 1; j >= 0; --j) {
        for (int k = 0; k <= j; ++k) {
            const double cont = 0.5 * (v[k] + v[k + 1]) + tree.driver[j][k] * tree.dt;
            const double lo = tree.lower[j][k];
            const double hi = tree.upper[j][k];
            if (lo > hi) throw ModelError("dynkin_oracle: crossed obstacles at a node");
            v[k] = std::min(std::max(cont, lo), hi);
        }
        v.resize(j + 1);
    }
    return v[0];
}

BinomialTreeSpec tree_from_model(const GameModel& model, int levels) {
    if (model.dim != 1) throw ModelError("tree_from_model: requires a 1-d model");
    BinomialTreeSpec tree;
    tree.levels = levels;
    tree.dt = model.horizon / levels;
    const double x0 = model.initial_state[0];
    const double sig = model.diffusion(0.0, model.initial_state)(0, 0);
    const double step = sig * std::sqrt(tree.dt);
    const double a0 = model.control_grid_a.at(0);
    const double b0 = model.control_grid_b.at(0);

    tree.driver.resize(levels);
    tree.lower.resize(levels);
    tree.upper.resize(levels);
    for (int j = 0; j < levels; ++j) {
        const double t = tree.dt * j;
        tree.driver[j].resize(j + 1);
        tree.lower[j].resize(j + 1);
        tree.upper[j].resize(j + 1);
        for (int k = 0; k <= j; ++k) {
            const Vec x{x0 + (2.0 * k - j) * step};
            tree.driver[j][k] = model.running_cost(t, x, a0, b0);
            tree.lower[j][k] = model.lower_obstacle(t, x);
            tree.upper[j][k] = model.upper_obstacle(t, x);
        }
    }
    tree.terminal.resize(levels + 1);
    for (int k = 0; k <= levels; ++k) {
        const Vec x{x0 + (2.0 * k - levels) * step};
        tree.terminal[k] = model.terminal(x);
    }
    return tree;
}

} // namespace mzsg
