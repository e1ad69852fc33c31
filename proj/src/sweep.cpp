#include "mqsim/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <thread>

#include "mqsim/errors.hpp"

namespace mqsim {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

SweepReport run_sweep(const RunConfig& cfg, int threads) {
    if (cfg.sweep_tols.empty() || cfg.sweep_accs.empty()) {
        throw ModelError("sweep requires non-empty sweep.tol_pcg and sweep.n_cg_acc grids");
    }
    if (cfg.solver != SolverKind::explicit_schur) {
        throw ModelError("sweep drives the explicit solver only");
    }

    auto sys = std::make_shared<const DiscreteSystem>(cfg.build_system());
    const PartitionedSystem ps = partition(sys, cfg.stepper.mass_mode);

    SweepReport report;
    for (const Probe& p : sys->probes) report.probe_names.push_back(p.name);

    const double tol_tight = *std::min_element(cfg.sweep_tols.begin(), cfg.sweep_tols.end());
    for (double tol : cfg.sweep_tols) {
        for (int acc : cfg.sweep_accs) {
            SweepCell cell;
            cell.row_kind = "cspe";
            cell.tol_pcg = tol;
            cell.n_cg_acc = acc;
            cell.mode = StartMode::cspe;
            report.rows.push_back(cell);
        }
    }
    for (StartMode mode : {StartMode::previous, StartMode::zero}) {
        SweepCell cell;
        cell.row_kind = mode == StartMode::previous ? "baseline_previous" : "baseline_zero";
        cell.tol_pcg = tol_tight;
        cell.n_cg_acc = cfg.sweep_accs.front();
        cell.mode = mode;
        report.rows.push_back(cell);
    }

    std::atomic<std::size_t> next{0};
    const auto worker = [&]() {
        for (;;) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= report.rows.size()) return;
            SweepCell& cell = report.rows[idx];
            StepperConfig st = cfg.stepper;
            st.tol_pcg = cell.tol_pcg;
            st.n_cg_acc = cell.n_cg_acc;
            st.start_mode = cell.mode;
            try {
                FieldState st0{0.0, Vector(ps.n_c, 0.0), Vector(ps.n_n, 0.0)};
                IntegrationResult res = integrate(ps, st0, cfg.t_end, st, sys->probes);
                cell.metrics = res.metrics;
                cell.final_probes =
                    res.trajectory.values.empty() ? Vector{} : res.trajectory.values.back();
                cell.ok = true;
            } catch (const std::exception& e) {
                cell.ok = false;
                cell.error = e.what();
            }
        }
    };

    const int n_workers =
        std::max(1, std::min<int>(threads, static_cast<int>(report.rows.size())));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    // Accuracy deltas against the tightest-tolerance cspe cell (first acc).
    const SweepCell* ref = nullptr;
    for (const SweepCell& cell : report.rows) {
        if (cell.row_kind == "cspe" && cell.tol_pcg == tol_tight &&
            cell.n_cg_acc == cfg.sweep_accs.front() && cell.ok) {
            ref = &cell;
            break;
        }
    }
    if (ref != nullptr) {
        for (SweepCell& cell : report.rows) {
            if (!cell.ok || cell.final_probes.size() != ref->final_probes.size()) continue;
            cell.probe_deltas.resize(cell.final_probes.size());
            for (std::size_t p = 0; p < cell.final_probes.size(); ++p) {
                const double denom = std::max(std::abs(ref->final_probes[p]), 1e-300);
                cell.probe_deltas[p] = std::abs(cell.final_probes[p] - ref->final_probes[p]) / denom;
            }
        }
    }
    return report;
}

void write_sweep_csv(const std::string& path, const SweepReport& report) {
    std::ofstream out(path);
    if (!out) throw IoError(IoError::Code::file_missing, "cannot write '" + path + "'");
    out << "row_kind,tol_pcg,n_cg_acc,start_mode,status,steps,dt_initial,dt_final,lambda_max0,"
           "avg_pcg_iters_knn,avg_pcg_iters_source,avg_pcg_iters_coupling,avg_pcg_iters_mass,"
           "solves_source,solves_coupling,solves_mass,max_subspace_cols,knn_products,"
           "accepted_updates,max_constraint_ratio,wall_seconds";
    for (const auto& name : report.probe_names) out << ",final_" << name;
    for (const auto& name : report.probe_names) out << ",delta_" << name;
    out << ",error\n";

    for (const SweepCell& cell : report.rows) {
        const RunMetrics& m = cell.metrics;
        out << cell.row_kind << "," << fmt(cell.tol_pcg) << "," << cell.n_cg_acc << ","
            << start_mode_name(cell.mode) << "," << (cell.ok ? "ok" : "failed") << "," << m.steps
            << "," << fmt(m.dt_initial) << "," << fmt(m.dt_final) << "," << fmt(m.lambda_max0)
            << "," << fmt(cell.avg_iters_knn()) << "," << fmt(m.avg_iters_source) << ","
            << fmt(m.avg_iters_coupling) << "," << fmt(m.avg_iters_mass) << "," << m.solves_source
            << "," << m.solves_coupling << "," << m.solves_mass << "," << m.max_subspace_cols
            << "," << m.knn_products << "," << m.accepted_updates << ","
            << fmt(m.max_constraint_ratio) << "," << fmt(m.wall_seconds);
        for (std::size_t p = 0; p < report.probe_names.size(); ++p) {
            out << "," << (p < cell.final_probes.size() ? fmt(cell.final_probes[p]) : "");
        }
        for (std::size_t p = 0; p < report.probe_names.size(); ++p) {
            out << "," << (p < cell.probe_deltas.size() ? fmt(cell.probe_deltas[p]) : "");
        }
        std::string err = cell.error;
        for (char& c : err) {
            if (c == ',' || c == '\n') c = ';';
        }
        out << "," << err << "\n";
    }
}

}  // namespace mqsim
