#pragma once

#include "mqsim/config.hpp"

namespace mqsim {

/// One sweep row: a (tol_pcg, n_cg_acc) grid cell with CSPE starts, or one
/// of the two fixed baselines (previous-solution start, zero start) run at
/// the tightest grid tolerance.
struct SweepCell {
    std::string row_kind;  // "cspe" | "baseline_previous" | "baseline_zero"
    double tol_pcg = 0.0;
    int n_cg_acc = 0;
    StartMode mode = StartMode::cspe;
    bool ok = false;
    std::string error;
    RunMetrics metrics;
    Vector final_probes;
    Vector probe_deltas;  // |final - ref| / |ref| vs the tightest-tolerance cell

    /// Average PCG iterations over the pseudo-inverse (K_nn) solves.
    double avg_iters_knn() const {
        const long solves = metrics.solves_source + metrics.solves_coupling;
        const double iters = metrics.avg_iters_source * metrics.solves_source +
                             metrics.avg_iters_coupling * metrics.solves_coupling;
        return solves > 0 ? iters / solves : 0.0;
    }
};

struct SweepReport {
    std::vector<std::string> probe_names;
    std::vector<SweepCell> rows;
};

/// Runs |tol grid| x |acc grid| CSPE cells plus the two baselines over the
/// shared immutable problem; cells execute concurrently on `threads`
/// workers. Per-cell failures are recorded in the row; the rest proceed.
SweepReport run_sweep(const RunConfig& cfg, int threads = 1);

void write_sweep_csv(const std::string& path, const SweepReport& report);

}  // namespace mqsim
