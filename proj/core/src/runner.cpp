#include "mzsg/runner.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>

#include <json.hpp>

#include "mzsg/builtins.hpp"
#include "mzsg/csv.hpp"
#include "mzsg/version.hpp"

namespace mzsg {

using nlohmann::json;

namespace {

struct RunContext {
    GameModel model;
    std::optional<PathBundle> bundle;
    std::optional<ValueProcess> vp;
    std::optional<ValueSurface> surface;
};

class OutputSink {
public:
    OutputSink(std::string dir, RunManifest& manifest) : dir_(std::move(dir)), manifest_(&manifest) {
        std::filesystem::create_directories(dir_);
    }

    void write(const std::string& name, const std::string& bytes, bool track = true) {
        const std::string path = dir_ + "/" + name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw ModelError("cannot open output file: " + path);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.close();
        if (track) manifest_->outputs.push_back({name, bytes.size(), digest_hex(bytes)});
    }

private:
    std::string dir_;
    RunManifest* manifest_;
};

const PathBundle& ensure_bundle(const RunConfig& cfg, RunContext& ctx) {
    if (!ctx.bundle) {
        const TimeGrid grid(cfg.solver.time_steps, ctx.model.horizon);
        ctx.bundle = simulate_uncontrolled(ctx.model, grid, cfg.solver.path_count, cfg.seed);
    }
    return *ctx.bundle;
}

void dump_paths_csv(const PathBundle& bundle, OutputSink& sink, const std::string& name) {
    std::vector<std::string> header{"path", "step", "t"};
    for (int k = 0; k < bundle.dim; ++k) header.push_back("x" + std::to_string(k));
    CsvTable csv(header);
    for (int m = 0; m < bundle.path_count; ++m)
        for (int i = 0; i <= bundle.grid.step_count; ++i) {
            csv.add(static_cast<long long>(m));
            csv.add(static_cast<long long>(i));
            csv.add(bundle.grid.time(i));
            for (int k = 0; k < bundle.dim; ++k) csv.add(bundle.state(m, i, k));
            csv.end_row();
        }
    sink.write(name, csv.bytes());
}

void task_validate(const RunConfig& cfg, RunContext& ctx, TaskResult& result) {
    const ValidationReport report = validate_model(
        ctx.model, cfg.validate.probe_count, cfg.seed, ValidationOptions{cfg.validate.probe_radius});
    result.headline["passed"] = report.passed ? 1.0 : 0.0;
    double worst = 0.0;
    for (const auto& e : report.entries) {
        worst = std::max(worst, e.violation - e.tolerance);
        result.headline["violation: " + e.assumption] = e.violation;
    }
    result.headline["worst_violation_over_tolerance"] = worst;
    result.headline["probes_used"] =
        report.entries.empty() ? 0.0 : report.entries.front().probes_used;
    if (!report.passed) {
        result.status = "flagged";
        for (const auto& e : report.entries)
            if (!e.passed) result.message += e.assumption + "; ";
    }
}

void task_solve_bsde(const RunConfig& cfg, RunContext& ctx, OutputSink& sink,
                     TaskResult& result) {
    const PathBundle& bundle = ensure_bundle(cfg, ctx);
    ctx.vp = solve_drbsde(ctx.model, bundle, cfg.solver.basis, cfg.solver.generator);
    const ValueProcessCheck check = check_value_process(ctx.model, bundle, *ctx.vp);

    const ValueProcess& vp = *ctx.vp;
    CsvTable csv({"step", "t", "mean_y", "mean_abs_z", "mean_dk_plus", "mean_dk_minus"});
    for (int i = 0; i <= vp.grid.step_count; ++i) {
        double my = 0.0, mz = 0.0, mkp = 0.0, mkm = 0.0;
        for (int m = 0; m < vp.path_count; ++m) {
            my += vp.Y(i, m);
            if (i < vp.grid.step_count) {
                double zn = 0.0;
                for (int k = 0; k < vp.dim; ++k) zn += vp.Z(i, m)[k] * vp.Z(i, m)[k];
                mz += std::sqrt(zn);
                mkp += vp.dKplus(i, m);
                mkm += vp.dKminus(i, m);
            }
        }
        csv.add(static_cast<long long>(i));
        csv.add(vp.grid.time(i));
        csv.add(my / vp.path_count);
        csv.add(mz / vp.path_count);
        csv.add(mkp / vp.path_count);
        csv.add(mkm / vp.path_count);
        csv.end_row();
    }
    sink.write("bsde_summary.csv", csv.bytes());

    if (cfg.dump_paths) {
        dump_paths_csv(bundle, sink, "paths.csv");
        std::vector<std::string> header{"path", "step", "t", "y"};
        for (int k = 0; k < vp.dim; ++k) header.push_back("z" + std::to_string(k));
        header.push_back("dk_plus");
        header.push_back("dk_minus");
        CsvTable full(header);
        for (int m = 0; m < vp.path_count; ++m)
            for (int i = 0; i <= vp.grid.step_count; ++i) {
                full.add(static_cast<long long>(m));
                full.add(static_cast<long long>(i));
                full.add(vp.grid.time(i));
                full.add(vp.Y(i, m));
                const bool interior = i < vp.grid.step_count;
                for (int k = 0; k < vp.dim; ++k) full.add(interior ? vp.Z(i, m)[k] : 0.0);
                full.add(interior ? vp.dKplus(i, m) : 0.0);
                full.add(interior ? vp.dKminus(i, m) : 0.0);
                full.end_row();
            }
        sink.write("bsde_paths.csv", full.bytes());
    }

    result.headline["y0"] = vp.y0_mean();
    result.headline["max_lower_breach"] = check.max_lower_breach;
    result.headline["max_upper_breach"] = check.max_upper_breach;
    result.headline["max_complementarity"] = check.max_complementarity;
}

void task_solve_pde(const RunConfig& cfg, RunContext& ctx, OutputSink& sink,
                    TaskResult& result) {
    const TimeGrid tgrid(cfg.solver.time_steps, ctx.model.horizon);
    const SpaceGrid sgrid(cfg.pde.space_min, cfg.pde.space_max, cfg.pde.nodes);
    ctx.surface = solve_double_obstacle_pde(ctx.model, tgrid, sgrid);
    const ValueSurface& surf = *ctx.surface;

    std::vector<std::string> header{"step", "t", "node"};
    for (int k = 0; k < sgrid.dim(); ++k) header.push_back("x" + std::to_string(k));
    header.push_back("u");
    header.push_back("contact");
    CsvTable csv(header);
    const std::size_t nodes = surf.nodes();
    for (int i = 0; i <= tgrid.step_count; ++i)
        for (std::size_t j = 0; j < nodes; ++j) {
            csv.add(static_cast<long long>(i));
            csv.add(tgrid.time(i));
            csv.add(j);
            const Vec x = surf.node_coords(j);
            for (int k = 0; k < sgrid.dim(); ++k) csv.add(x[k]);
            csv.add(surf.at(i, j));
            const Contact c = surf.contact_at(i, j);
            csv.add(std::string(c == Contact::Interior ? "interior"
                                                       : (c == Contact::Lower ? "lower" : "upper")));
            csv.end_row();
        }
    sink.write("pde_solution.csv", csv.bytes());

    const ViscosityReport visc = viscosity_residual_check(ctx.model, surf);
    CsvTable rcsv({"metric", "value"});
    auto row = [&](const std::string& k, double v) {
        rcsv.add(k);
        rcsv.add(v);
        rcsv.end_row();
    };
    row("tol", visc.tol);
    row("fitted_c", visc.fitted_c);
    row("max_interior_abs", visc.max_interior_abs);
    row("max_lower_defect", visc.max_lower_defect);
    row("max_upper_defect", visc.max_upper_defect);
    row("max_lower_eq", visc.max_lower_eq);
    row("max_upper_eq", visc.max_upper_eq);
    row("passed", visc.passed ? 1.0 : 0.0);
    sink.write("pde_residuals.csv", rcsv.bytes());

    result.headline["u0_at_x0"] = surface_value(surf, 0, ctx.model.initial_state);
    result.headline["substeps_per_interval"] = surf.substeps_per_interval;
    result.headline["residual_fitted_c"] = visc.fitted_c;
    for (const std::string& w : surf.warnings) result.message += w + "; ";
}

void task_cross_check(const RunConfig& cfg, RunContext& ctx, OutputSink& sink,
                      TaskResult& result) {
    (void)cfg;
    if (!ctx.vp) throw ModelError("cross-check requires solve-bsde earlier in the task list");
    if (!ctx.surface) throw ModelError("cross-check requires solve-pde earlier in the task list");
    const CompareReport rep = compare_pde_probabilistic(*ctx.surface, *ctx.vp, ctx.model);

    CsvTable csv({"kind", "t", "x0", "u_pde", "y_probabilistic", "gap"});
    csv.add(std::string("initial"));
    csv.add(0.0);
    csv.add(ctx.model.initial_state[0]);
    csv.add(rep.u_pde_x0);
    csv.add(rep.y0);
    csv.add(rep.gap);
    csv.end_row();
    for (const auto& p : rep.probes) {
        csv.add(std::string("probe"));
        csv.add(p.t);
        csv.add(p.x[0]);
        csv.add(p.u_pde);
        csv.add(p.y_regression);
        csv.add(p.gap);
        csv.end_row();
    }
    sink.write("cross_check.csv", csv.bytes());

    result.headline["gap"] = rep.gap;
    result.headline["combined_tolerance"] = rep.combined_tolerance;
    result.headline["max_probe_gap"] = rep.max_probe_gap;
    if (rep.flagged) {
        result.status = "flagged";
        result.message = "PDE/probabilistic gap exceeds the combined tolerance";
    }
}

void task_saddle_audit(const RunConfig& cfg, RunContext& ctx, OutputSink& sink,
                       TaskResult& result) {
    std::optional<Strategy> strategy;
    if (cfg.game.source == "pde") {
        if (!ctx.surface)
            throw ModelError("saddle-audit with game.source=pde requires solve-pde earlier");
        strategy.emplace(ctx.model, *ctx.surface, cfg.game.epsilon_stop);
    } else {
        if (!ctx.vp)
            throw ModelError("saddle-audit with game.source=bsde requires solve-bsde earlier");
        strategy.emplace(ctx.model, *ctx.vp, cfg.game.epsilon_stop);
    }
    const std::vector<DeviationSpec> devs =
        cfg.game.has_deviations ? cfg.game.deviations : standard_deviations(ctx.model);
    const int paths = cfg.game.path_count > 0 ? cfg.game.path_count : cfg.solver.path_count;
    const TimeGrid grid(cfg.solver.time_steps, ctx.model.horizon);
    const SaddleAuditReport rep =
        saddle_audit(ctx.model, *strategy, devs, grid, paths, cfg.seed, cfg.game.allowance);

    CsvTable csv({"label", "mean", "std_error", "violation"});
    csv.add(std::string("saddle"));
    csv.add(rep.saddle.mean);
    csv.add(rep.saddle.std_error);
    csv.add(static_cast<long long>(rep.y0_flag ? 1 : 0));
    csv.end_row();
    for (const auto& r : rep.rows) {
        csv.add(r.label);
        csv.add(r.mean);
        csv.add(r.std_error);
        csv.add(static_cast<long long>(r.violation ? 1 : 0));
        csv.end_row();
    }
    sink.write("saddle_audit.csv", csv.bytes());

    result.headline["j_saddle"] = rep.saddle.mean;
    result.headline["y0"] = rep.y0;
    result.headline["y0_gap"] = rep.y0_gap;
    result.headline["deviations"] = static_cast<double>(rep.rows.size());
    if (rep.any_violation || rep.y0_flag) {
        result.status = "flagged";
        result.message = "saddle inequalities violated beyond the statistical allowance";
    }
    // Human-readable summary block for the manifest.
    std::string summary = "J(saddle)=" + format_double(rep.saddle.mean) +
                          " se=" + format_double(rep.saddle.std_error) +
                          " Y0=" + format_double(rep.y0) + "; ";
    for (const auto& r : rep.rows)
        summary += r.label + (r.violation ? " VIOLATION; " : " ok; ");
    result.message += summary;
}

void task_truncation_audit(const RunConfig& cfg, RunContext& ctx, OutputSink& sink,
                           TaskResult& result) {
    const PathBundle& bundle = ensure_bundle(cfg, ctx);
    const RegressionBasis basis =
        cfg.solver.truncation_basis ? *cfg.solver.truncation_basis : cfg.solver.basis;
    const MonotonicityReport rep =
        monotonicity_audit(ctx.model, bundle, basis, cfg.solver.n_list, cfg.solver.m_list);

    CsvTable csv({"label", "n", "m", "y0"});
    for (const auto& s : rep.solves) {
        csv.add(std::string("hstar_trunc"));
        csv.add(static_cast<long long>(s.n));
        csv.add(static_cast<long long>(s.m));
        csv.add(s.y0);
        csv.end_row();
    }
    csv.add(std::string("phi"));
    csv.add(static_cast<long long>(-1));
    csv.add(static_cast<long long>(-1));
    csv.add(rep.phi_y0);
    csv.end_row();
    sink.write("truncation_audit.csv", csv.bytes());

    result.headline["max_violation_n"] = rep.max_violation_n;
    result.headline["max_violation_m"] = rep.max_violation_m;
    result.headline["max_violation_phi"] = rep.max_violation_phi;
    result.headline["phi_y0"] = rep.phi_y0;
    const double tol = 1e-8;
    if (rep.max_violation_n > tol || rep.max_violation_m > tol ||
        rep.max_violation_phi > tol) {
        result.status = "flagged";
        result.message = "truncation-family ordering violated beyond tolerance";
    }
}

} // namespace

bool RunManifest::ok() const {
    for (const auto& t : tasks)
        if (t.status != "ok") return false;
    return true;
}

std::string RunManifest::to_json() const {
    json j;
    j["version"] = version;
    j["config"] = json::parse(config_echo);
    json jt = json::array();
    for (const auto& t : tasks) {
        json e;
        e["name"] = t.name;
        e["status"] = t.status;
        if (!t.message.empty()) e["message"] = t.message;
        e["headline"] = t.headline;
        e["seconds"] = t.seconds;
        jt.push_back(e);
    }
    j["tasks"] = jt;
    json jo = json::array();
    for (const auto& o : outputs)
        jo.push_back({{"path", o.path}, {"bytes", o.bytes}, {"digest", o.digest}});
    j["outputs"] = jo;
    return j.dump(2) + "\n";
}

RunManifest run(const RunConfig& config) {
    RunManifest manifest;
    manifest.version = kVersion;
    manifest.config_echo = config_echo_json(config);

    RunContext ctx;
    ctx.model = build_model(config.model);
    OutputSink sink(config.out_dir, manifest);

    for (Task task : config.tasks) {
        TaskResult result;
        result.name = task_name(task);
        result.status = "ok";
        const auto start = std::chrono::steady_clock::now();
        try {
            switch (task) {
                case Task::Validate: task_validate(config, ctx, result); break;
                case Task::SolveBsde: task_solve_bsde(config, ctx, sink, result); break;
                case Task::SolvePde: task_solve_pde(config, ctx, sink, result); break;
                case Task::CrossCheck: task_cross_check(config, ctx, sink, result); break;
                case Task::SaddleAudit: task_saddle_audit(config, ctx, sink, result); break;
                case Task::TruncationAudit:
                    task_truncation_audit(config, ctx, sink, result);
                    break;
            }
        } catch (const std::exception& e) {
            result.status = "error";
            result.message = e.what();
        }
        result.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        manifest.tasks.push_back(std::move(result));
    }

    sink.write("manifest.json", manifest.to_json(), /*track=*/false);
    return manifest;
}

} // namespace mzsg
