#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "magopt/config.hpp"
#include "magopt/errors.hpp"
#include "magopt/io.hpp"
#include "magopt/optimizer.hpp"
#include "magopt/polarization.hpp"
#include "magopt/sensitivity.hpp"

namespace fs = std::filesystem;
using namespace magopt;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::string mesh_path;
    std::string mode;
    bool seedless = false;  // reserved: the pipeline is deterministic
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "run configuration file");
    cmd->add_option("--out", args.out_dir, "output directory (default from config)");
    cmd->add_option("--mesh", args.mesh_path, "mesh file, overrides the generator");
    cmd->add_option("--mode", args.mode, "material mode: linear | nonlinear")
        ->check(CLI::IsMember({"linear", "nonlinear"}));
    cmd->add_flag("--seedless", args.seedless, "reserved, no-op");
}

RunConfig resolve_config(const CommonArgs& args) {
    RunConfig cfg;
    if (!args.config_path.empty()) {
        cfg = load_config_file(args.config_path);
    } else {
        cfg.validate();
    }
    if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
    if (!args.mesh_path.empty()) cfg.mesh_path = args.mesh_path;
    if (args.mode == "linear") cfg.mode = MaterialMode::Linear;
    if (args.mode == "nonlinear") cfg.mode = MaterialMode::Nonlinear;
    return cfg;
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write '" + path.string() + "'");
    return out;
}

int cmd_solve(const CommonArgs& args) {
    const RunConfig cfg = resolve_config(args);
    const Mesh mesh = cfg.make_mesh();
    const BHModel model = cfg.make_model();
    const DesignState state = DesignState::all_on(mesh, cfg.mode);
    const GapCircle gap = cfg.make_gap(mesh);
    const TargetCurve target = cfg.make_target();

    const StateSolveReport report = solve_state_report(mesh, model, state, cfg.solver);
    const double J = objective(mesh, gap, target, report.u);
    const auto trace = radial_flux_trace(mesh, gap, report.u);

    fs::create_directories(cfg.out_dir);
    if (cfg.write_vtk) {
        auto out = open_output(fs::path(cfg.out_dir) / "u.vtk");
        write_vtk(out, mesh, "magnetostatic potential",
                  {{"u", report.u.values}},
                  {{"b_mag", element_b_magnitude(mesh, report.u)},
                   {"nu", element_reluctivity_values(mesh, model, state, report.u)}});
    }
    {
        auto out = open_output(fs::path(cfg.out_dir) / "trace.csv");
        write_trace_csv(out, gap, trace, target);
    }
    {
        auto out = open_output(fs::path(cfg.out_dir) / "summary.txt");
        out << "J = " << format_double(J) << "\n";
        out << "mode = " << (cfg.mode == MaterialMode::Linear ? "linear" : "nonlinear") << "\n";
        out << "nodes = " << mesh.num_nodes() << "\n";
        out << "triangles = " << mesh.num_triangles() << "\n";
        out << "newton_iterations = " << report.newton_iterations << "\n";
    }
    std::cout << "J = " << format_double(J) << "\n";
    return 0;
}

int cmd_sensitivity(const CommonArgs& args) {
    const RunConfig cfg = resolve_config(args);
    const Mesh mesh = cfg.make_mesh();
    const BHModel model = cfg.make_model();
    const DesignState state = DesignState::all_on(mesh, cfg.mode);
    const GapCircle gap = cfg.make_gap(mesh);
    const TargetCurve target = cfg.make_target();

    const NodalField u = solve_state(mesh, model, state, cfg.solver);
    const AdjointSolveReport adj =
        solve_adjoint(mesh, model, state, u, gap, target, cfg.solver.linear_tol);
    SensitivityField sens = onoff_sensitivities(mesh, state, u, adj.p);
    if (cfg.mode == MaterialMode::Linear) {
        sens.topo = topological_derivative_field(mesh, u, adj.p, model.nu0(), model.nu1(),
                                                 cfg.mode);
    }

    fs::create_directories(cfg.out_dir);
    {
        auto out = open_output(fs::path(cfg.out_dir) / "sens.csv");
        write_sensitivity_csv(out, mesh, sens);
    }
    if (cfg.write_vtk) {
        std::vector<double> onoff_cells(static_cast<std::size_t>(mesh.num_triangles()), 0.0);
        std::vector<double> topo_cells(static_cast<std::size_t>(mesh.num_triangles()), 0.0);
        for (std::size_t k = 0; k < sens.elem_ids.size(); ++k) {
            onoff_cells[static_cast<std::size_t>(sens.elem_ids[k])] = sens.onoff[k];
            if (k < sens.topo.size()) {
                topo_cells[static_cast<std::size_t>(sens.elem_ids[k])] = sens.topo[k];
            }
        }
        auto out = open_output(fs::path(cfg.out_dir) / "sens.vtk");
        write_vtk(out, mesh, "onoff sensitivities", {{"u", u.values}},
                  {{"onoff", onoff_cells}, {"topo", topo_cells}});
    }
    std::cout << "design elements: " << sens.elem_ids.size() << "\n";
    return 0;
}

int cmd_optimize(const CommonArgs& args) {
    const RunConfig cfg = resolve_config(args);
    const Mesh mesh = cfg.make_mesh();
    const BHModel model = cfg.make_model();
    const GapCircle gap = cfg.make_gap(mesh);
    const TargetCurve target = cfg.make_target();

    const OptimizationHistory history =
        run_onoff(mesh, model, cfg.mode, gap, target, cfg.optimizer, cfg.solver);

    fs::create_directories(cfg.out_dir);
    {
        auto out = open_output(fs::path(cfg.out_dir) / "history.csv");
        write_history_csv(out, history);
    }
    if (cfg.write_snapshots) {
        for (const auto& rec : history.entries) {
            auto out = open_output(fs::path(cfg.out_dir) /
                                   ("design_iter_" + std::to_string(rec.iter) + ".csv"));
            write_design_csv(out, mesh, rec.flags);
        }
    }

    // Final state: the best design seen during the run.
    DesignState best = DesignState::all_on(mesh, cfg.mode);
    best.flags = history.best_flags;
    const NodalField u = solve_state(mesh, model, best, cfg.solver);
    const auto trace = radial_flux_trace(mesh, gap, u);
    {
        auto out = open_output(fs::path(cfg.out_dir) / "trace.csv");
        write_trace_csv(out, gap, trace, target);
    }
    if (cfg.write_vtk) {
        auto out = open_output(fs::path(cfg.out_dir) / "design.vtk");
        write_vtk(out, mesh, "optimized design", {{"u", u.values}},
                  {{"b_mag", element_b_magnitude(mesh, u)},
                   {"flag", design_flag_values(mesh, best)},
                   {"nu", element_reluctivity_values(mesh, model, best, u)}});
    }

    if (history.aborted) {
        std::cerr << "optimize: aborted: " << history.abort_reason << "\n";
        return 1;
    }
    const double J0 = history.entries.front().J;
    std::cout << "iterations: " << history.entries.size() - 1 << "\n";
    std::cout << "J initial = " << format_double(J0) << "\n";
    std::cout << "J best    = " << format_double(history.best_J) << " (iteration "
              << history.best_iter << ")\n";
    if (J0 > 0.0) {
        std::cout << "decrease  = " << format_double(100.0 * (1.0 - history.best_J / J0))
                  << " %\n";
    }
    return 0;
}

int cmd_polarization(const std::string& shape_text, double nu0, double nu1, int n_panels,
                     bool refine) {
    const ShapeSpec spec = parse_shape_spec(shape_text);
    const InclusionShape shape = panelize(spec, n_panels);
    const PolarizationMatrix P = polarization_matrix(shape, nu0, nu1);

    std::cout << "P (" << n_panels << " panels):\n";
    std::cout << "  [ " << format_double(P.P(0, 0)) << "  " << format_double(P.P(0, 1)) << " ]\n";
    std::cout << "  [ " << format_double(P.P(1, 0)) << "  " << format_double(P.P(1, 1)) << " ]\n";

    if (spec.kind == ShapeKind::Disk) {
        const Eigen::Matrix2d ref = disk_polarization_matrix(nu0, nu1);
        const double rel_err =
            (P.P - ref).cwiseAbs().maxCoeff() / ref.cwiseAbs().maxCoeff();
        std::cout << "disk reference 2*pi*(nu0-nu1)/(nu0+nu1) = " << format_double(ref(0, 0))
                  << "\n";
        std::cout << "relative error = " << format_double(rel_err) << "\n";
    }

    if (refine) {
        std::cout << "panel refinement:\n";
        std::cout << "n,P11,P22,P12,delta_rel\n";
        Eigen::Matrix2d prev;
        bool have_prev = false;
        for (int n = n_panels; n <= 8 * n_panels; n *= 2) {
            const PolarizationMatrix Pn = polarization_matrix(panelize(spec, n), nu0, nu1);
            std::cout << n << ',' << format_double(Pn.P(0, 0)) << ','
                      << format_double(Pn.P(1, 1)) << ',' << format_double(Pn.P(0, 1));
            if (have_prev) {
                const double delta = (Pn.P - prev).norm() / Pn.P.norm();
                std::cout << ',' << format_double(delta);
            } else {
                std::cout << ",";
            }
            std::cout << "\n";
            prev = Pn.P;
            have_prev = true;
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"2D magnetostatics topology optimization (ON/OFF method)"};
    app.require_subcommand(1);

    CommonArgs solve_args, sens_args, opt_args;
    CLI::App* solve = app.add_subcommand("solve", "solve the state equation and export fields");
    add_common(solve, solve_args);
    CLI::App* sens = app.add_subcommand("sensitivity",
                                        "compute ON/OFF sensitivities and the topological "
                                        "derivative field");
    add_common(sens, sens_args);
    CLI::App* opt = app.add_subcommand("optimize", "run the ON/OFF optimization loop");
    add_common(opt, opt_args);

    std::string shape_text;
    double nu0 = 2.0, nu1 = 1.0;
    int n_panels = 256;
    bool refine = false;
    CLI::App* pol = app.add_subcommand("polarization",
                                       "polarization matrix of an inclusion shape");
    pol->add_option("shape", shape_text, "disk | ellipse:a,b | polygon:x1,y1;...")->required();
    pol->add_option("nu0", nu0, "outside reluctivity")->required();
    pol->add_option("nu1", nu1, "inside reluctivity")->required();
    pol->add_option("panels", n_panels, "panel count (default 256)");
    pol->add_flag("--refine", refine, "print a panel-refinement self-convergence table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (*solve) return cmd_solve(solve_args);
        if (*sens) return cmd_sensitivity(sens_args);
        if (*opt) return cmd_optimize(opt_args);
        if (*pol) return cmd_polarization(shape_text, nu0, nu1, n_panels, refine);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const SolverError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
