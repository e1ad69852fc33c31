#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <memory>

#include "mqsim/config.hpp"
#include "mqsim/errors.hpp"
#include "mqsim/kernels.hpp"
#include "mqsim/mmio.hpp"
#include "mqsim/sweep.hpp"
#include "mqsim/version.hpp"

namespace {

using namespace mqsim;

struct GlobalOptions {
    std::string config_path;
    std::string out_dir = "mqsim_out";
    int threads = 1;
    long long seed = -1;  // -1 = keep the config's seed
    bool quiet = false;
};

void say(const GlobalOptions& g, const std::string& line) {
    if (!g.quiet) std::printf("%s\n", line.c_str());
}

RunConfig load_config(const GlobalOptions& g) {
    RunConfig cfg = RunConfig::from_file(g.config_path);
    if (g.seed >= 0) cfg.stepper.seed = static_cast<std::uint64_t>(g.seed);
    return cfg;
}

int cmd_run(const GlobalOptions& g) {
    const RunConfig cfg = load_config(g);
    std::filesystem::create_directories(g.out_dir);
    auto sys = std::make_shared<const DiscreteSystem>(cfg.build_system());

    if (cfg.solver == SolverKind::explicit_schur) {
        const PartitionedSystem ps = partition(sys, cfg.stepper.mass_mode);
        SchurWorkspace ws(ps, cfg.stepper);
        FieldState st0{0.0, Vector(ps.n_c, 0.0), Vector(ps.n_n, 0.0)};
        const IntegrationResult res =
            integrate(ps, st0, cfg.t_end, cfg.stepper, sys->probes, &ws);
        write_trajectory_csv(g.out_dir + "/trajectory.csv", res.trajectory);
        write_step_report_csv(g.out_dir + "/steps.csv", ws.records);
        write_run_metadata(g.out_dir + "/run_meta.kv", cfg, res.metrics, "explicit_schur");
        say(g, "explicit run: " + std::to_string(res.metrics.steps) + " steps, dt_max = " +
                   std::to_string(res.metrics.dt_max0) + " s, avg K_nn iters = " +
                   std::to_string((res.metrics.avg_iters_source + res.metrics.avg_iters_coupling) / 2.0));
        say(g, "wall (solver loop): " + std::to_string(res.metrics.wall_seconds) + " s");
        for (const auto& w : res.metrics.warnings) say(g, "warning: " + w);
    } else {
        double dt = cfg.newton_dt;
        if (dt <= 0.0) {
            // Reference default: a tenth of the explicit stability limit.
            const PartitionedSystem ps = partition(sys, cfg.stepper.mass_mode);
            const CflEstimate est =
                estimate_cfl(ps, Vector(ps.n_c, 0.0), cfg.stepper.safety, cfg.stepper.cfl_tol,
                             cfg.stepper.seed);
            dt = (cfg.stepper.dt > 0.0 ? cfg.stepper.dt : est.dt_max) / 10.0;
        }
        const IntegrationResult res = integrate_implicit(
            *sys, Vector(sys->n_dofs, 0.0), cfg.t_end, dt, cfg.newton, sys->probes,
            cfg.stepper.output_stride);
        write_trajectory_csv(g.out_dir + "/trajectory.csv", res.trajectory);
        write_run_metadata(g.out_dir + "/run_meta.kv", cfg, res.metrics, "implicit_euler");
        say(g, "implicit run: " + std::to_string(res.metrics.steps) + " steps, " +
                   std::to_string(res.metrics.newton_iters_total) + " Newton iterations");
        say(g, "wall (solver loop): " + std::to_string(res.metrics.wall_seconds) + " s");
    }
    return 0;
}

int cmd_sweep(const GlobalOptions& g) {
    const RunConfig cfg = load_config(g);
    std::filesystem::create_directories(g.out_dir);
    const SweepReport rep = run_sweep(cfg, g.threads);
    write_sweep_csv(g.out_dir + "/sweep.csv", rep);
    int failed = 0;
    for (const auto& row : rep.rows) failed += row.ok ? 0 : 1;
    say(g, "sweep: " + std::to_string(rep.rows.size()) + " rows (" + std::to_string(failed) +
               " failed) -> " + g.out_dir + "/sweep.csv");
    return 0;
}

int cmd_compare(const GlobalOptions& g, const std::string& path_a, const std::string& path_b,
                double tol) {
    const Trajectory a = read_trajectory_csv(path_a);
    const Trajectory b = read_trajectory_csv(path_b);
    const CompareReport rep = compare_trajectories(a, b);
    for (const auto& p : rep.probes) {
        say(g, "probe " + p.name + ": max_rel = " + std::to_string(p.max_rel) +
                   ", rms_rel = " + std::to_string(p.rms_rel));
    }
    say(g, std::string(rep.pass(tol) ? "PASS" : "FAIL") + " at tol = " + std::to_string(tol));
    return rep.pass(tol) ? 0 : 1;
}

int cmd_export_model(const GlobalOptions& g) {
    const RunConfig cfg = load_config(g);
    const DiscreteSystem sys = cfg.build_system();
    const ImportPaths paths = export_model(sys, g.out_dir);
    say(g, "wrote " + paths.m + ", " + paths.k + ", " + paths.source_pattern + ", " +
               paths.conductive_mask);
    return 0;
}

int cmd_audit(const GlobalOptions& g) {
    const RunConfig cfg = load_config(g);
    auto sys = std::make_shared<const DiscreteSystem>(cfg.build_system());
    const PartitionedSystem ps = partition(sys, cfg.stepper.mass_mode);
    SchurWorkspace ws(ps, cfg.stepper);
    FieldState st0{0.0, Vector(ps.n_c, 0.0), Vector(ps.n_n, 0.0)};
    integrate(ps, st0, cfg.t_end, cfg.stepper, sys->probes, &ws);

    bool ok = true;
    const auto check_family = [&](const RhsFamilyContext& fam, const CsrMatrix& A) {
        const auto audit = fam.sub.audit(make_operator(A));
        const bool products_match = fam.knn_products == fam.sub.accepted_updates();
        ok = ok && audit.max_w_deviation <= 1e-10 && audit.max_g_deviation <= 1e-10 &&
             products_match;
        say(g, "family " + fam.name + ": cols = " + std::to_string(audit.cols) +
                   ", max W dev = " + std::to_string(audit.max_w_deviation) +
                   ", max G dev = " + std::to_string(audit.max_g_deviation) + ", products = " +
                   std::to_string(fam.knn_products) + ", accepted updates = " +
                   std::to_string(fam.sub.accepted_updates()) +
                   (products_match ? "" : "  [MISMATCH]"));
    };
    check_family(ws.source, ps.K_nn);
    check_family(ws.coupling, ps.K_nn);
    if (ps.mass_mode == MassMode::consistent) check_family(ws.mass, ps.M_cc);
    say(g, ok ? "audit PASS" : "audit FAIL");
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mqsim: explicit Schur-complement time integration for transient "
                 "eddy-current problems, with CSPE-accelerated PCG"};
    app.set_version_flag("--version", mqsim::kVersion);
    app.fallthrough();  // global options may appear after the subcommand

    GlobalOptions g;
    app.add_option("--config", g.config_path, "key-value config file");
    app.add_option("--out", g.out_dir, "output directory")->capture_default_str();
    app.add_option("--threads", g.threads, "worker threads for sweep cells")
        ->capture_default_str();
    app.add_option("--seed", g.seed, "override the config's seed");
    app.add_flag("--quiet", g.quiet, "suppress progress output");

    auto* run = app.add_subcommand("run", "single solver run; writes trajectory/steps/metadata");
    auto* sweep = app.add_subcommand("sweep", "tol_pcg x n_cg_acc grid plus start-vector baselines");
    auto* compare = app.add_subcommand("compare", "diff two trajectory CSVs");
    std::string cmp_a, cmp_b;
    double cmp_tol = 0.01;
    compare->add_option("a", cmp_a, "trajectory CSV")->required();
    compare->add_option("b", cmp_b, "reference trajectory CSV")->required();
    compare->add_option("--tol", cmp_tol, "max relative deviation to pass")->capture_default_str();
    auto* exportm = app.add_subcommand("export-model", "write the configured model to Matrix Market files");
    auto* audit = app.add_subcommand("audit", "run and audit the CSPE caches and product counters");
    app.require_subcommand(1);

    CLI11_PARSE(app, argc, argv);

    const auto need_config = [&]() {
        if (g.config_path.empty()) {
            std::fprintf(stderr, "error: --config is required for this subcommand\n");
            std::exit(2);
        }
    };

    try {
        if (run->parsed()) {
            need_config();
            return cmd_run(g);
        }
        if (sweep->parsed()) {
            need_config();
            return cmd_sweep(g);
        }
        if (compare->parsed()) return cmd_compare(g, cmp_a, cmp_b, cmp_tol);
        if (exportm->parsed()) {
            need_config();
            return cmd_export_model(g);
        }
        if (audit->parsed()) {
            need_config();
            return cmd_audit(g);
        }
    } catch (const mqsim::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
