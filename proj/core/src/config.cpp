#include "mzsg/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mzsg/builtins.hpp"

namespace mzsg {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                ok = true;
                break;
            }
        if (!ok)
            throw ConfigError("unknown key \"" + (path.empty() ? it.key() : path + "." + it.key()) +
                              "\"");
    }
}

const json& require(const json& obj, const std::string& path, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end())
        throw ConfigError("missing required key \"" + (path.empty() ? key : path + "." + key) +
                          "\"");
    return *it;
}

double as_number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError("\"" + where + "\" must be a number");
    return v.get<double>();
}

int as_int(const json& v, const std::string& where) {
    if (!v.is_number_integer()) throw ConfigError("\"" + where + "\" must be an integer");
    return v.get<int>();
}

std::string as_string(const json& v, const std::string& where) {
    if (!v.is_string()) throw ConfigError("\"" + where + "\" must be a string");
    return v.get<std::string>();
}

std::vector<double> as_number_array(const json& v, const std::string& where) {
    if (!v.is_array()) throw ConfigError("\"" + where + "\" must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) out.push_back(as_number(e, where));
    return out;
}

std::vector<int> as_int_array(const json& v, const std::string& where) {
    if (!v.is_array()) throw ConfigError("\"" + where + "\" must be an array of integers");
    std::vector<int> out;
    for (const auto& e : v) out.push_back(as_int(e, where));
    return out;
}

std::vector<double> parse_control_grid(const json& v, const std::string& where) {
    if (v.is_array()) return as_number_array(v, where);
    if (v.is_object()) {
        check_keys(v, where, {"linspace"});
        const auto arr = as_number_array(require(v, where, "linspace"), where + ".linspace");
        if (arr.size() != 3)
            throw ConfigError("\"" + where + ".linspace\" must be [lo, hi, count]");
        return linspace(arr[0], arr[1], static_cast<int>(arr[2]));
    }
    throw ConfigError("\"" + where + "\" must be an array or a linspace object");
}

ModelConfig::Coefficient parse_coefficient(const json& v, const std::string& where,
                                           const std::set<std::string>& families) {
    if (!v.is_object()) throw ConfigError("\"" + where + "\" must be an object");
    ModelConfig::Coefficient c;
    c.family = as_string(require(v, where, "family"), where + ".family");
    if (!families.count(c.family))
        throw ConfigError("\"" + where + ".family\" has unsupported value \"" + c.family + "\"");
    check_keys(v, where,
               {"family", "value", "scale", "rate", "a_quad", "b_quad", "state_slope"});
    if (v.contains("value")) c.value = as_number(v["value"], where + ".value");
    if (v.contains("scale")) c.scale = as_number(v["scale"], where + ".scale");
    if (v.contains("rate")) c.rate = as_number(v["rate"], where + ".rate");
    if (v.contains("a_quad")) c.a_quad = as_number(v["a_quad"], where + ".a_quad");
    if (v.contains("b_quad")) c.b_quad = as_number(v["b_quad"], where + ".b_quad");
    if (v.contains("state_slope")) c.state_slope = as_number(v["state_slope"], where + ".state_slope");
    return c;
}

RegressionBasis parse_basis(const json& v, const std::string& where) {
    if (!v.is_object()) throw ConfigError("\"" + where + "\" must be an object");
    check_keys(v, where, {"family", "degree", "bin_count"});
    RegressionBasis basis;
    const std::string family = as_string(require(v, where, "family"), where + ".family");
    if (family == "poly") {
        basis.family = RegressionBasis::Family::Polynomial;
        if (v.contains("degree")) basis.degree = as_int(v["degree"], where + ".degree");
        if (basis.degree < 0) throw ConfigError("\"" + where + ".degree\" must be >= 0");
    } else if (family == "bins") {
        basis.family = RegressionBasis::Family::LocalBins;
        if (v.contains("bin_count")) basis.bin_count = as_int(v["bin_count"], where + ".bin_count");
        if (basis.bin_count < 1) throw ConfigError("\"" + where + ".bin_count\" must be >= 1");
    } else {
        throw ConfigError("\"" + where + ".family\" must be \"poly\" or \"bins\"");
    }
    return basis;
}

DeviationSpec parse_deviation(const json& v, const std::string& where) {
    if (!v.is_object()) throw ConfigError("\"" + where + "\" must be an object");
    check_keys(v, where, {"player", "control", "stop"});
    DeviationSpec dev;
    const std::string player = as_string(require(v, where, "player"), where + ".player");
    if (player == "min")
        dev.player = DeviationSpec::Player::Minimizer;
    else if (player == "max")
        dev.player = DeviationSpec::Player::Maximizer;
    else
        throw ConfigError("\"" + where + ".player\" must be \"min\" or \"max\"");

    if (v.contains("control")) {
        const json& c = v["control"];
        if (c.is_string()) {
            const std::string s = c.get<std::string>();
            if (s == "same")
                dev.control = DeviationSpec::ControlKind::Same;
            else if (s == "random")
                dev.control = DeviationSpec::ControlKind::RandomFeedback;
            else
                throw ConfigError("\"" + where + ".control\" must be \"same\", \"random\" or "
                                  "{\"constant\": index}");
        } else if (c.is_object()) {
            check_keys(c, where + ".control", {"constant"});
            dev.control = DeviationSpec::ControlKind::Constant;
            dev.control_index = static_cast<std::size_t>(
                as_int(require(c, where + ".control", "constant"), where + ".control.constant"));
        } else {
            throw ConfigError("\"" + where + ".control\" has an unsupported type");
        }
    }
    if (v.contains("stop")) {
        const json& s = v["stop"];
        if (s.is_string()) {
            const std::string str = s.get<std::string>();
            if (str == "same")
                dev.stop = DeviationSpec::StopKind::Same;
            else if (str == "never")
                dev.stop = DeviationSpec::StopKind::Never;
            else
                throw ConfigError("\"" + where + ".stop\" must be \"same\", \"never\", "
                                  "{\"fixed-step\": i} or {\"band-shift\": d}");
        } else if (s.is_object()) {
            if (s.contains("fixed-step")) {
                check_keys(s, where + ".stop", {"fixed-step"});
                dev.stop = DeviationSpec::StopKind::FixedStep;
                dev.fixed_step = as_int(s["fixed-step"], where + ".stop.fixed-step");
            } else if (s.contains("band-shift")) {
                check_keys(s, where + ".stop", {"band-shift"});
                dev.stop = DeviationSpec::StopKind::BandShift;
                dev.band_shift = as_number(s["band-shift"], where + ".stop.band-shift");
            } else {
                throw ConfigError("\"" + where + ".stop\" has an unsupported form");
            }
        } else {
            throw ConfigError("\"" + where + ".stop\" has an unsupported type");
        }
    }
    return dev;
}

} // namespace

std::string task_name(Task t) {
    switch (t) {
        case Task::Validate: return "validate";
        case Task::SolveBsde: return "solve-bsde";
        case Task::SolvePde: return "solve-pde";
        case Task::CrossCheck: return "cross-check";
        case Task::SaddleAudit: return "saddle-audit";
        case Task::TruncationAudit: return "truncation-audit";
    }
    return "?";
}

GameModel build_model(const ModelConfig& config) {
    if (config.is_builtin) return builtin_model(config.builtin_name);

    GameModel m;
    m.name = "inline";
    m.dim = config.dimension;
    m.horizon = config.horizon;
    m.initial_state = config.initial_state;
    m.growth_constant = config.growth_constant;
    m.growth_exponent = config.growth_exponent;
    m.control_grid_a = config.control_grid_a;
    m.control_grid_b = config.control_grid_b;
    if (static_cast<int>(m.initial_state.size()) != m.dim)
        throw ConfigError("model.initial_state length must equal model.dimension");
    if (m.control_grid_a.empty() || m.control_grid_b.empty())
        throw ConfigError("model control grids must be non-empty");

    const int d = m.dim;
    {
        const auto& c = config.diffusion; // family: constant
        const double s = c.value;
        m.diffusion = [d, s](double, const Vec&) {
            Matrix out(d);
            for (int i = 0; i < d; ++i) out(i, i) = s;
            return out;
        };
    }
    {
        const auto& c = config.drift;
        if (c.family == "zero") {
            m.drift = [d](double, const Vec&, double, double) { return Vec(d, 0.0); };
        } else if (c.family == "scaled-difference") {
            const double k = c.scale;
            m.drift = [d, k](double, const Vec&, double a, double b) {
                Vec f(d, 0.0);
                f[0] = k * (a - b);
                return f;
            };
        } else { // constant
            const double v = c.value;
            m.drift = [d, v](double, const Vec&, double, double) {
                Vec f(d, 0.0);
                f[0] = v;
                return f;
            };
        }
    }
    {
        const auto& c = config.running_cost;
        if (c.family == "zero") {
            m.running_cost = [](double, const Vec&, double, double) { return 0.0; };
        } else if (c.family == "constant") {
            const double v = c.value;
            m.running_cost = [v](double, const Vec&, double, double) { return v; };
        } else if (c.family == "bilinear") {
            m.running_cost = [](double, const Vec&, double a, double b) { return a * b; };
        } else { // quadratic-separated
            const double aq = c.a_quad, bq = c.b_quad, slope = c.state_slope;
            m.running_cost = [aq, bq, slope](double, const Vec& x, double a, double b) {
                return aq * a * a + bq * b * b + slope * x[0];
            };
        }
    }
    {
        const auto& c = config.terminal;
        if (c.family == "zero") {
            m.terminal = [](const Vec&) { return 0.0; };
        } else if (c.family == "constant") {
            const double v = c.value;
            m.terminal = [v](const Vec&) { return v; };
        } else if (c.family == "linear") {
            m.terminal = [](const Vec& x) { return x[0]; };
        } else { // scaled-tanh
            const double s = c.scale, r = c.rate;
            m.terminal = [s, r](const Vec& x) { return s * std::tanh(r * x[0]); };
        }
    }
    auto obstacle = [](const ModelConfig::Coefficient& c) {
        if (c.family == "constant") {
            const double v = c.value;
            return std::function<double(double, const Vec&)>(
                [v](double, const Vec&) { return v; });
        }
        // linear-margin: x[0] + offset
        const double off = c.value;
        return std::function<double(double, const Vec&)>(
            [off](double, const Vec& x) { return x[0] + off; });
    };
    m.lower_obstacle = obstacle(config.lower_obstacle);
    m.upper_obstacle = obstacle(config.upper_obstacle);
    return m;
}

RunConfig parse_config(const std::string& document) {
    json root;
    try {
        root = json::parse(document);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("config root must be an object");
    check_keys(root, "", {"seed", "out_dir", "tasks", "model", "validate", "solver", "pde", "game"});

    RunConfig cfg;
    const json& seed = require(root, "", "seed");
    if (!seed.is_number_integer() || seed.get<long long>() < 0)
        throw ConfigError("\"seed\" is mandatory and must be a non-negative integer");
    cfg.seed = seed.get<std::uint64_t>();

    if (root.contains("out_dir")) cfg.out_dir = as_string(root["out_dir"], "out_dir");

    const json& tasks = require(root, "", "tasks");
    if (!tasks.is_array() || tasks.empty())
        throw ConfigError("\"tasks\" must be a non-empty array");
    for (const auto& t : tasks) {
        const std::string s = as_string(t, "tasks[]");
        if (s == "validate")
            cfg.tasks.push_back(Task::Validate);
        else if (s == "solve-bsde")
            cfg.tasks.push_back(Task::SolveBsde);
        else if (s == "solve-pde")
            cfg.tasks.push_back(Task::SolvePde);
        else if (s == "cross-check")
            cfg.tasks.push_back(Task::CrossCheck);
        else if (s == "saddle-audit")
            cfg.tasks.push_back(Task::SaddleAudit);
        else if (s == "truncation-audit")
            cfg.tasks.push_back(Task::TruncationAudit);
        else
            throw ConfigError("unknown task \"" + s + "\"");
    }

    const json& model = require(root, "", "model");
    if (!model.is_object()) throw ConfigError("\"model\" must be an object");
    if (model.contains("builtin")) {
        check_keys(model, "model", {"builtin"});
        cfg.model.is_builtin = true;
        cfg.model.builtin_name = as_string(model["builtin"], "model.builtin");
        builtin_model(cfg.model.builtin_name); // existence check
    } else {
        check_keys(model, "model",
                   {"dimension", "horizon", "initial_state", "growth_constant",
                    "growth_exponent", "diffusion", "drift", "running_cost", "terminal",
                    "lower_obstacle", "upper_obstacle", "control_grid_a", "control_grid_b"});
        cfg.model.is_builtin = false;
        cfg.model.dimension = as_int(require(model, "model", "dimension"), "model.dimension");
        cfg.model.horizon = as_number(require(model, "model", "horizon"), "model.horizon");
        cfg.model.initial_state =
            as_number_array(require(model, "model", "initial_state"), "model.initial_state");
        cfg.model.growth_constant =
            as_number(require(model, "model", "growth_constant"), "model.growth_constant");
        cfg.model.growth_exponent =
            as_number(require(model, "model", "growth_exponent"), "model.growth_exponent");
        cfg.model.diffusion =
            parse_coefficient(require(model, "model", "diffusion"), "model.diffusion",
                              {"constant"});
        cfg.model.drift = parse_coefficient(require(model, "model", "drift"), "model.drift",
                                            {"zero", "scaled-difference", "constant"});
        cfg.model.running_cost =
            parse_coefficient(require(model, "model", "running_cost"), "model.running_cost",
                              {"zero", "constant", "bilinear", "quadratic-separated"});
        cfg.model.terminal =
            parse_coefficient(require(model, "model", "terminal"), "model.terminal",
                              {"zero", "constant", "linear", "scaled-tanh"});
        cfg.model.lower_obstacle =
            parse_coefficient(require(model, "model", "lower_obstacle"), "model.lower_obstacle",
                              {"constant", "linear-margin"});
        cfg.model.upper_obstacle =
            parse_coefficient(require(model, "model", "upper_obstacle"), "model.upper_obstacle",
                              {"constant", "linear-margin"});
        cfg.model.control_grid_a =
            parse_control_grid(require(model, "model", "control_grid_a"), "model.control_grid_a");
        cfg.model.control_grid_b =
            parse_control_grid(require(model, "model", "control_grid_b"), "model.control_grid_b");
    }

    if (root.contains("validate")) {
        const json& v = root["validate"];
        check_keys(v, "validate", {"probe_count", "probe_radius"});
        if (v.contains("probe_count"))
            cfg.validate.probe_count = as_int(v["probe_count"], "validate.probe_count");
        if (v.contains("probe_radius"))
            cfg.validate.probe_radius = as_number(v["probe_radius"], "validate.probe_radius");
        if (cfg.validate.probe_count < 1)
            throw ConfigError("\"validate.probe_count\" must be >= 1");
    }

    if (root.contains("solver")) {
        const json& s = root["solver"];
        check_keys(s, "solver", {"time_steps", "path_count", "basis", "generator", "truncation"});
        if (s.contains("time_steps"))
            cfg.solver.time_steps = as_int(s["time_steps"], "solver.time_steps");
        if (s.contains("path_count"))
            cfg.solver.path_count = as_int(s["path_count"], "solver.path_count");
        if (cfg.solver.time_steps < 1 || cfg.solver.path_count < 1)
            throw ConfigError("\"solver.time_steps\" and \"solver.path_count\" must be >= 1");
        if (s.contains("basis")) cfg.solver.basis = parse_basis(s["basis"], "solver.basis");
        if (s.contains("generator")) {
            const std::string g = as_string(s["generator"], "solver.generator");
            if (g == "hstar")
                cfg.solver.generator.kind = GeneratorSpec::Kind::HStar;
            else if (g == "zero")
                cfg.solver.generator.kind = GeneratorSpec::Kind::Zero;
            else if (g == "phi")
                cfg.solver.generator.kind = GeneratorSpec::Kind::Phi;
            else
                throw ConfigError("\"solver.generator\" must be \"hstar\", \"zero\" or \"phi\"");
        }
        if (s.contains("truncation")) {
            const json& t = s["truncation"];
            check_keys(t, "solver.truncation", {"n_list", "m_list", "basis"});
            if (t.contains("n_list"))
                cfg.solver.n_list = as_int_array(t["n_list"], "solver.truncation.n_list");
            if (t.contains("m_list"))
                cfg.solver.m_list = as_int_array(t["m_list"], "solver.truncation.m_list");
            if (t.contains("basis"))
                cfg.solver.truncation_basis = parse_basis(t["basis"], "solver.truncation.basis");
        }
    }

    if (root.contains("pde")) {
        const json& p = root["pde"];
        check_keys(p, "pde", {"space_min", "space_max", "nodes"});
        if (p.contains("space_min"))
            cfg.pde.space_min = as_number_array(p["space_min"], "pde.space_min");
        if (p.contains("space_max"))
            cfg.pde.space_max = as_number_array(p["space_max"], "pde.space_max");
        if (p.contains("nodes")) cfg.pde.nodes = as_int_array(p["nodes"], "pde.nodes");
    }

    if (root.contains("game")) {
        const json& g = root["game"];
        check_keys(g, "game",
                   {"epsilon_stop", "allowance", "source", "path_count", "deviations"});
        if (g.contains("epsilon_stop"))
            cfg.game.epsilon_stop = as_number(g["epsilon_stop"], "game.epsilon_stop");
        if (!(cfg.game.epsilon_stop > 0.0))
            throw ConfigError("\"game.epsilon_stop\" must be > 0");
        if (g.contains("allowance"))
            cfg.game.allowance = as_number(g["allowance"], "game.allowance");
        if (g.contains("source")) {
            cfg.game.source = as_string(g["source"], "game.source");
            if (cfg.game.source != "bsde" && cfg.game.source != "pde")
                throw ConfigError("\"game.source\" must be \"bsde\" or \"pde\"");
        }
        if (g.contains("path_count"))
            cfg.game.path_count = as_int(g["path_count"], "game.path_count");
        if (g.contains("deviations")) {
            const json& d = g["deviations"];
            if (!d.is_array()) throw ConfigError("\"game.deviations\" must be an array");
            cfg.game.has_deviations = true;
            for (std::size_t i = 0; i < d.size(); ++i)
                cfg.game.deviations.push_back(
                    parse_deviation(d[i], "game.deviations[" + std::to_string(i) + "]"));
        }
    }

    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string config_echo_json(const RunConfig& config) {
    json j;
    j["seed"] = config.seed;
    j["out_dir"] = config.out_dir;
    json tasks = json::array();
    for (Task t : config.tasks) tasks.push_back(task_name(t));
    j["tasks"] = tasks;
    if (config.model.is_builtin) {
        j["model"] = {{"builtin", config.model.builtin_name}};
    } else {
        j["model"] = {{"dimension", config.model.dimension},
                      {"horizon", config.model.horizon},
                      {"inline", true}};
    }
    j["validate"] = {{"probe_count", config.validate.probe_count},
                     {"probe_radius", config.validate.probe_radius}};
    j["solver"] = {{"time_steps", config.solver.time_steps},
                   {"path_count", config.solver.path_count},
                   {"basis", config.solver.basis.tag()},
                   {"generator", config.solver.generator.tag()},
                   {"n_list", config.solver.n_list},
                   {"m_list", config.solver.m_list}};
    j["pde"] = {{"space_min", config.pde.space_min},
                {"space_max", config.pde.space_max},
                {"nodes", config.pde.nodes}};
    json devs = json::array();
    for (const auto& d : config.game.deviations) devs.push_back(d.label());
    j["game"] = {{"epsilon_stop", config.game.epsilon_stop},
                 {"allowance", config.game.allowance},
                 {"source", config.game.source},
                 {"path_count", config.game.path_count},
                 {"deviations", devs}};
    j["dump_paths"] = config.dump_paths;
    return j.dump(2);
}

} // namespace mzsg
