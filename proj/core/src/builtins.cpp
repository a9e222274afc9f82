#include "mzsg/builtins.hpp"

#include <cmath>

namespace mzsg {

std::vector<double> linspace(double lo, double hi, int count) {
    if (count < 1) throw ModelError("linspace: count must be >= 1");
    std::vector<double> v(count);
    if (count == 1) {
        v[0] = lo;
        return v;
    }
    for (int i = 0; i < count; ++i) v[i] = lo + (hi - lo) * i / (count - 1);
    return v;
}

namespace {

Matrix scalar_sigma(int d, double value) {
    Matrix m(d);
    for (int i = 0; i < d; ++i) m(i, i) = value;
    return m;
}

GameModel base_1d(const std::string& name) {
    GameModel m;
    m.name = name;
    m.dim = 1;
    m.horizon = 1.0;
    m.initial_state = {0.0};
    m.growth_constant = 1.0;
    m.growth_exponent = 2.0;
    m.diffusion = [](double, const Vec&) { return scalar_sigma(1, 1.0); };
    m.drift = [](double, const Vec&, double, double) { return Vec{0.0}; };
    m.running_cost = [](double, const Vec&, double, double) { return 0.0; };
    return m;
}

GameModel make_zero() {
    GameModel m = base_1d("zero");
    m.terminal = [](const Vec&) { return 0.0; };
    m.lower_obstacle = [](double, const Vec&) { return -1.0; };
    m.upper_obstacle = [](double, const Vec&) { return 1.0; };
    m.control_grid_a = {0.0};
    m.control_grid_b = {0.0};
    return m;
}

GameModel make_linear_heat() {
    GameModel m = base_1d("linear-heat");
    m.growth_constant = 9.0;
    m.terminal = [](const Vec& x) { return x[0]; };
    m.lower_obstacle = [](double, const Vec& x) { return x[0] - 8.0; };
    m.upper_obstacle = [](double, const Vec& x) { return x[0] + 8.0; };
    m.control_grid_a = {0.0};
    m.control_grid_b = {0.0};
    return m;
}

GameModel make_dynkin_1d() {
    GameModel m = base_1d("dynkin-1d");
    m.running_cost = [](double, const Vec&, double, double) { return 0.3; };
    m.terminal = [](const Vec& x) { return 0.5 * std::tanh(2.0 * x[0]); };
    m.lower_obstacle = [](double, const Vec&) { return -0.5; };
    m.upper_obstacle = [](double, const Vec&) { return 0.5; };
    m.control_grid_a = {-1.0, 0.0, 1.0};
    m.control_grid_b = {-1.0, 0.0, 1.0};
    return m;
}

GameModel make_isaacs_separated_1d() {
    GameModel m = base_1d("isaacs-separated-1d");
    m.drift = [](double, const Vec&, double a, double b) { return Vec{0.4 * (a - b)}; };
    m.running_cost = [](double, const Vec& x, double a, double b) {
        return 0.5 * a * a - 0.25 * b * b + 0.25 * x[0];
    };
    m.terminal = [](const Vec& x) { return 0.75 * std::tanh(x[0]); };
    m.lower_obstacle = [](double, const Vec&) { return -0.8; };
    m.upper_obstacle = [](double, const Vec&) { return 0.8; };
    m.control_grid_a = linspace(-1.0, 1.0, 21);
    m.control_grid_b = linspace(-1.0, 1.0, 21);
    return m;
}

GameModel make_matching_pennies() {
    GameModel m = base_1d("matching-pennies");
    m.running_cost = [](double, const Vec&, double a, double b) { return a * b; };
    m.terminal = [](const Vec&) { return 0.0; };
    m.lower_obstacle = [](double, const Vec&) { return -1.0; };
    m.upper_obstacle = [](double, const Vec&) { return 1.0; };
    m.control_grid_a = {-1.0, 1.0};
    m.control_grid_b = {-1.0, 1.0};
    return m;
}

} // namespace

GameModel builtin_model(const std::string& name) {
    if (name == "zero") return make_zero();
    if (name == "linear-heat") return make_linear_heat();
    if (name == "dynkin-1d") return make_dynkin_1d();
    if (name == "isaacs-separated-1d") return make_isaacs_separated_1d();
    if (name == "matching-pennies") return make_matching_pennies();
    throw ConfigError("unknown built-in model: " + name);
}

std::vector<std::string> builtin_model_names() {
    return {"zero", "linear-heat", "dynkin-1d", "isaacs-separated-1d", "matching-pennies"};
}

} // namespace mzsg
