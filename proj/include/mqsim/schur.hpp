#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "mqsim/cspe.hpp"
#include "mqsim/partition.hpp"
#include "mqsim/pcg.hpp"
#include "mqsim/power_iteration.hpp"
#include "mqsim/trajectory.hpp"

namespace mqsim {

/// Solution split across the partition at one time instant.
struct FieldState {
    double t = 0.0;
    Vector a_c;
    Vector a_n;
};

struct CflEstimate {
    double lambda_max = 0.0;  // 1/s
    double dt_max = 0.0;      // = safety * 2 / lambda_max
    double safety = 1.0;
    bool converged = false;
};

enum class StartMode { cspe, previous, zero };

std::string_view start_mode_name(StartMode m);

struct StepperConfig {
    double dt = 0.0;  // 0 = use the CFL estimate's dt_max
    double tol_pcg = 1e-6;
    int max_pcg_iter = 200000;
    int n_cg_acc = 3;
    StartMode start_mode = StartMode::cspe;
    int max_subspace = 32;
    MassMode mass_mode = MassMode::consistent;
    int cfl_recheck_interval = 250;  // steps between re-estimates (nonlinear only)
    double safety = 0.9;
    bool conjunctive_append_gate = true;  // see SubspaceOperator
    int output_stride = 1;
    int galerkin_audit_samples = 0;  // verify this many SPE start vectors with real products
    std::uint64_t seed = 2026;
    double cfl_tol = 1e-4;  // power-iteration relative tolerance
    int cfl_max_iter = 50000;
};

/// One right-hand-side family of the multiple-rhs problem (source solves,
/// coupling solves, mass solves), with its own subspace and history.
struct RhsFamilyContext {
    std::string name;
    StartMode mode = StartMode::cspe;
    SubspaceOperator sub;
    Vector prev_solution;
    bool has_prev = false;
    long solves = 0;
    long iters_total = 0;
    long knn_products = 0;  // operator-column products consumed by updates
    double max_galerkin_ratio = 0.0;
    long galerkin_samples = 0;

    RhsFamilyContext(std::string name, const StepperConfig& cfg);
    double avg_iters() const { return solves > 0 ? double(iters_total) / double(solves) : 0.0; }
};

/// k_p with ||K_nn k_p - r|| <= tol * ||r||, via PCG; K_nn is never formed
/// or inverted explicitly. Throws ConvergenceError (with the report's
/// numbers in the message) when PCG fails: inconsistent rhs or a tolerance
/// the operator cannot meet.
std::pair<Vector, PcgReport> apply_pseudo_inverse(const CsrMatrix& K_nn, std::span<const double> r,
                                                  std::span<const double> start, double tol,
                                                  const Preconditioner& pre,
                                                  int max_iter = 200000);

/// Per-run mutable state: the three rhs families, preconditioners, scratch.
class SchurWorkspace {
  public:
    SchurWorkspace(const PartitionedSystem& ps, const StepperConfig& cfg);

    RhsFamilyContext source;
    RhsFamilyContext coupling;
    RhsFamilyContext mass;
    Preconditioner pre_knn;
    Preconditioner pre_mcc;
    Vector inv_mass_diagonal;  // lumped mode only
    CsrMatrix K_cc;            // current nonlinear stiffness block (values mutate)
    PartitionedSystem::KccScratch kcc_scratch;
    Vector power_start;        // warm start for CFL re-estimates

    // Solve bookkeeping for the step-report stream.
    struct SolveRecord {
        std::int64_t step;
        double t;
        char family;  // 's', 'c', 'm'
        int iters;
        int subspace_cols;
    };
    std::vector<SolveRecord> records;
    std::int64_t current_step = 0;
    double current_time = 0.0;
    int galerkin_budget = 0;

    /// PCG with the family's start-vector policy; updates history/subspace.
    Vector solve(RhsFamilyContext& fam, const CsrMatrix& A, std::span<const double> rhs,
                 double tol, int max_iter, const Preconditioner& pre);
};

/// Action of the generalized Schur complement
/// S(x) = K_cc x - K_cn K_nn^# K_cn^T x for the current stiffness block;
/// the dense complement is never materialized.
Vector schur_apply(const PartitionedSystem& ps, const CsrMatrix& K_cc_current,
                   std::span<const double> x, double tol, SchurWorkspace& ws);

/// lambda_max of M_cc^{-1} (K_cc(a_c) - K_cn K_nn^# K_cn^T) by power
/// iteration with inner tolerances one decade below `tol`;
/// dt_max = safety * 2 / lambda_max.
CflEstimate estimate_cfl(const PartitionedSystem& ps, std::span<const double> a_c, double safety,
                         double tol, std::uint64_t seed = 2026, Vector* warm_start = nullptr,
                         int max_iter = 50000);

/// One forward-Euler step of the Schur ODE; also recovers the air solution.
/// The source pseudo-inverse solve is performed once and reused bitwise in
/// the recovery.
FieldState explicit_euler_step(const PartitionedSystem& ps, const FieldState& state, double dt,
                               const StepperConfig& cfg, SchurWorkspace& ws);

struct RunMetrics {
    double lambda_max0 = 0.0;
    double dt_max0 = 0.0;
    double dt_initial = 0.0;
    double dt_final = 0.0;
    std::int64_t steps = 0;
    double wall_seconds = 0.0;  // solver loop only
    int max_subspace_cols = 0;
    double max_constraint_ratio = 0.0;  // ||K_cn^T a_c + K_nn a_n - j_sn|| / ||j_sn||
    double max_galerkin_ratio = 0.0;
    long galerkin_samples = 0;
    long knn_products = 0;
    long accepted_updates = 0;
    int cfl_rechecks = 0;
    long newton_iters_total = 0;  // implicit runs only
    // per-family averages (source, coupling, mass)
    double avg_iters_source = 0.0, avg_iters_coupling = 0.0, avg_iters_mass = 0.0;
    long solves_source = 0, solves_coupling = 0, solves_mass = 0;
    std::vector<std::string> warnings;
};

struct IntegrationResult {
    Trajectory trajectory;
    RunMetrics metrics;
    FieldState final_state;
};

/// Explicit time integration to t_end with probe recording, constraint
/// monitoring, blow-up detection ("CFL violation suspected"), and periodic
/// CFL re-estimation for nonlinear materials (dt shrinks, never grows).
IntegrationResult integrate(const PartitionedSystem& ps, const FieldState& state0, double t_end,
                            const StepperConfig& cfg, std::span<const Probe> probes,
                            SchurWorkspace* external_ws = nullptr);

/// step,t,rhs_family,pcg_iters,subspace_cols
void write_step_report_csv(const std::string& path,
                           std::span<const SchurWorkspace::SolveRecord> records);

}  // namespace mqsim
