#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "mzsg/builtins.hpp"
#include "mzsg/csv.hpp"
#include "mzsg/parallel.hpp"
#include "mzsg/runner.hpp"

using namespace mzsg;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string temp_dir(const std::string& tag) {
    const auto dir = std::filesystem::temp_directory_path() / ("mzsg_test_" + tag);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir.string();
}

const char* kMinimalConfig = R"({
  "seed": 1,
  "tasks": ["validate"],
  "model": {"builtin": "zero"}
})";

} // namespace

TEST_CASE("minimal config parses with defaults filled") {
    const RunConfig cfg = parse_config(kMinimalConfig);
    CHECK(cfg.seed == 1);
    CHECK(cfg.tasks.size() == 1);
    CHECK(cfg.tasks[0] == Task::Validate);
    CHECK(cfg.model.is_builtin);
    CHECK(cfg.model.builtin_name == "zero");
    CHECK(cfg.solver.time_steps == 50);
    CHECK(cfg.solver.path_count == 20000);
    CHECK(cfg.validate.probe_count == 2000);
    CHECK(cfg.game.epsilon_stop == 0.05);
}

TEST_CASE("missing seed names the key") {
    try {
        parse_config(R"({"tasks": ["validate"], "model": {"builtin": "zero"}})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("seed") != std::string::npos);
    }
}

TEST_CASE("unknown keys are named") {
    try {
        parse_config(R"({"seed": 1, "tasks": ["validate"], "model": {"builtin": "zero"},
                         "pathz": 3})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("pathz") != std::string::npos);
    }
    try {
        parse_config(R"({"seed": 1, "tasks": ["validate"], "model": {"builtin": "zero"},
                         "solver": {"paths": 10}})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("solver.paths") != std::string::npos);
    }
}

TEST_CASE("malformed JSON reports a parse error") {
    CHECK_THROWS_AS(parse_config("{"), ConfigError);
    CHECK_THROWS_AS(parse_config("[1,2]"), ConfigError);
}

TEST_CASE("unknown builtin and unknown task are rejected") {
    CHECK_THROWS_AS(parse_config(R"({"seed":1,"tasks":["validate"],
                                     "model":{"builtin":"nope"}})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"seed":1,"tasks":["fly"],
                                     "model":{"builtin":"zero"}})"),
                    ConfigError);
}

TEST_CASE("inline model block builds a working model") {
    const char* doc = R"({
      "seed": 7,
      "tasks": ["validate"],
      "model": {
        "dimension": 1,
        "horizon": 1.0,
        "initial_state": [0.0],
        "growth_constant": 1.0,
        "growth_exponent": 2.0,
        "diffusion": {"family": "constant", "value": 1.0},
        "drift": {"family": "scaled-difference", "scale": 0.4},
        "running_cost": {"family": "quadratic-separated",
                          "a_quad": 0.5, "b_quad": -0.25, "state_slope": 0.25},
        "terminal": {"family": "scaled-tanh", "scale": 0.75, "rate": 1.0},
        "lower_obstacle": {"family": "constant", "value": -0.8},
        "upper_obstacle": {"family": "constant", "value": 0.8},
        "control_grid_a": {"linspace": [-1.0, 1.0, 21]},
        "control_grid_b": {"linspace": [-1.0, 1.0, 21]}
      }
    })";
    const RunConfig cfg = parse_config(doc);
    const GameModel m = build_model(cfg.model);
    CHECK(m.control_grid_a.size() == 21);
    // Mirrors the isaacs-separated-1d registry entry.
    const GameModel ref = builtin_model("isaacs-separated-1d");
    const Vec x{0.3};
    CHECK(m.drift(0.1, x, 0.5, -0.5)[0] == ref.drift(0.1, x, 0.5, -0.5)[0]);
    CHECK(m.running_cost(0.1, x, 0.5, -0.5) == ref.running_cost(0.1, x, 0.5, -0.5));
    CHECK(m.terminal(x) == ref.terminal(x));
    CHECK(validate_model(m, 200, 1).passed);
}

TEST_CASE("deviation specs parse") {
    const char* doc = R"({
      "seed": 1, "tasks": ["validate"], "model": {"builtin": "zero"},
      "game": {"deviations": [
        {"player": "min", "control": {"constant": 2}, "stop": "same"},
        {"player": "max", "control": "random", "stop": {"fixed-step": 0}},
        {"player": "max", "stop": {"band-shift": 0.2}}
      ]}
    })";
    const RunConfig cfg = parse_config(doc);
    REQUIRE(cfg.game.deviations.size() == 3);
    CHECK(cfg.game.deviations[0].control == DeviationSpec::ControlKind::Constant);
    CHECK(cfg.game.deviations[0].control_index == 2);
    CHECK(cfg.game.deviations[1].stop == DeviationSpec::StopKind::FixedStep);
    CHECK(cfg.game.deviations[2].stop == DeviationSpec::StopKind::BandShift);
    CHECK(cfg.game.deviations[2].band_shift == 0.2);
}

TEST_CASE("format_double round-trips") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 1234.5678, 0.0, -1.0, 1e300}) {
        const std::string s = format_double(v);
        CHECK(std::stod(s) == v);
    }
}

TEST_CASE("csv table layout and digest stability") {
    CsvTable t({"a", "b"});
    t.add(1.5);
    t.add(std::string("x"));
    t.end_row();
    CHECK(t.bytes() == "a,b\n1.5,x\n");
    CHECK(digest_hex(t.bytes()) == digest_hex("a,b\n1.5,x\n"));
    CHECK(digest_hex("alpha") != digest_hex("beta"));

    CsvTable bad({"a", "b"});
    bad.add(1.0);
    CHECK_THROWS(bad.end_row());
}

TEST_CASE("run writes outputs whose digests match the manifest") {
    RunConfig cfg = parse_config(R"({
      "seed": 5,
      "tasks": ["validate", "solve-bsde"],
      "model": {"builtin": "zero"},
      "solver": {"time_steps": 8, "path_count": 500}
    })");
    cfg.out_dir = temp_dir("digests");
    const RunManifest manifest = run(cfg);
    CHECK(manifest.ok());
    REQUIRE(!manifest.outputs.empty());
    for (const auto& out : manifest.outputs) {
        const std::string bytes = slurp(cfg.out_dir + "/" + out.path);
        CHECK(bytes.size() == out.bytes);
        CHECK(digest_hex(bytes) == out.digest);
    }
    CHECK(std::filesystem::exists(cfg.out_dir + "/manifest.json"));
}

TEST_CASE("identical config gives byte-identical outputs across thread budgets") {
    const char* doc = R"({
      "seed": 9,
      "tasks": ["validate", "solve-bsde", "solve-pde", "cross-check"],
      "model": {"builtin": "linear-heat"},
      "solver": {"time_steps": 10, "path_count": 1000},
      "pde": {"space_min": [-5.0], "space_max": [5.0], "nodes": [51]}
    })";
    RunConfig c1 = parse_config(doc);
    c1.out_dir = temp_dir("threads1");
    RunConfig c2 = parse_config(doc);
    c2.out_dir = temp_dir("threads8");
    set_thread_budget(1);
    const RunManifest m1 = run(c1);
    set_thread_budget(8);
    const RunManifest m2 = run(c2);
    set_thread_budget(0);
    CHECK(m1.ok());
    CHECK(m2.ok());
    REQUIRE(m1.outputs.size() == m2.outputs.size());
    for (std::size_t i = 0; i < m1.outputs.size(); ++i) {
        CHECK(m1.outputs[i].path == m2.outputs[i].path);
        CHECK(m1.outputs[i].digest == m2.outputs[i].digest);
    }
}

TEST_CASE("task errors are recorded and later tasks still run") {
    RunConfig cfg = parse_config(R"({
      "seed": 3,
      "tasks": ["cross-check", "validate"],
      "model": {"builtin": "zero"}
    })");
    cfg.out_dir = temp_dir("taskerr");
    const RunManifest manifest = run(cfg);
    CHECK_FALSE(manifest.ok());
    REQUIRE(manifest.tasks.size() == 2);
    CHECK(manifest.tasks[0].status == "error");
    CHECK(manifest.tasks[0].message.find("solve-bsde") != std::string::npos);
    CHECK(manifest.tasks[1].status == "ok");
}

TEST_CASE("validation failure flags the run") {
    RunConfig cfg = parse_config(R"({
      "seed": 3,
      "tasks": ["validate"],
      "model": {
        "dimension": 1, "horizon": 1.0, "initial_state": [0.0],
        "growth_constant": 1.0, "growth_exponent": 2.0,
        "diffusion": {"family": "constant", "value": 1.0},
        "drift": {"family": "zero"},
        "running_cost": {"family": "zero"},
        "terminal": {"family": "constant", "value": 2.0},
        "lower_obstacle": {"family": "constant", "value": -1.0},
        "upper_obstacle": {"family": "constant", "value": 1.0},
        "control_grid_a": [0.0],
        "control_grid_b": [0.0]
      }
    })");
    cfg.out_dir = temp_dir("valflag");
    const RunManifest manifest = run(cfg);
    CHECK_FALSE(manifest.ok());
    CHECK(manifest.tasks[0].status == "flagged");
}
