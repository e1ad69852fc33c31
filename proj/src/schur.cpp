#include "mqsim/schur.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "mqsim/errors.hpp"
#include "mqsim/kernels.hpp"
#include "mqsim/probes.hpp"
#include "mqsim/waveform.hpp"

namespace mqsim {

namespace k = kernels;

std::string_view start_mode_name(StartMode m) {
    switch (m) {
        case StartMode::cspe: return "cspe";
        case StartMode::previous: return "previous";
        case StartMode::zero: return "zero";
    }
    return "?";
}

RhsFamilyContext::RhsFamilyContext(std::string fam_name, const StepperConfig& cfg)
    : name(std::move(fam_name)),
      mode(cfg.start_mode),
      sub(cfg.max_subspace, cfg.n_cg_acc, cfg.conjunctive_append_gate) {}

std::pair<Vector, PcgReport> apply_pseudo_inverse(const CsrMatrix& K_nn, std::span<const double> r,
                                                  std::span<const double> start, double tol,
                                                  const Preconditioner& pre, int max_iter) {
    auto [x, rep] = pcg(make_operator(K_nn), r, start, tol, max_iter, pre);
    if (!rep.converged) {
        throw ConvergenceError("pseudo-inverse solve failed: " + std::to_string(rep.iterations) +
                               " iterations, relative residual " +
                               std::to_string(rep.final_relative_residual) +
                               " (inconsistent rhs or tolerance too tight)");
    }
    return {std::move(x), rep};
}

SchurWorkspace::SchurWorkspace(const PartitionedSystem& ps, const StepperConfig& cfg)
    : source("source", cfg), coupling("coupling", cfg), mass("mass", cfg) {
    pre_knn = build_jacobi_or_identity(ps.K_nn);
    if (ps.mass_mode == MassMode::lumped) {
        inv_mass_diagonal = ps.M_cc.diagonal_vector();
        for (double& v : inv_mass_diagonal) {
            if (!(v > 0.0)) throw SingularError("lumped mass has a non-positive diagonal entry");
            v = 1.0 / v;
        }
    } else {
        pre_mcc = build_jacobi(ps.M_cc);
    }
    K_cc = ps.K_cc0;
    kcc_scratch = ps.make_scratch();
    galerkin_budget = cfg.galerkin_audit_samples;
}

Vector SchurWorkspace::solve(RhsFamilyContext& fam, const CsrMatrix& A, std::span<const double> rhs,
                             double tol, int max_iter, const Preconditioner& pre) {
    Vector start;
    switch (fam.mode) {
        case StartMode::cspe:
            start = fam.sub.start_vector(rhs);
            break;
        case StartMode::previous:
            start = fam.has_prev ? fam.prev_solution : Vector(rhs.size(), 0.0);
            break;
        case StartMode::zero:
            start = Vector(rhs.size(), 0.0);
            break;
    }

    // Optional instrumented Galerkin check of the issued start vector, with a
    // genuine operator product (never counted as subspace work).
    if (fam.mode == StartMode::cspe && !fam.sub.empty() &&
        fam.galerkin_samples < galerkin_budget) {
        const double norm_r = k::nrm2(rhs);
        if (norm_r > 0.0) {
            Vector ax(start.size());
            A.apply(start, ax);
            Vector resid(rhs.begin(), rhs.end());
            k::axpy(-1.0, ax, resid);
            double sq = 0.0;
            for (const Vector& v : fam.sub.basis()) {
                const double c = k::dot(v, resid);
                sq += c * c;
            }
            fam.max_galerkin_ratio = std::max(fam.max_galerkin_ratio, std::sqrt(sq) / norm_r);
            ++fam.galerkin_samples;
        }
    }

    auto [x, rep] = pcg(make_operator(A), rhs, start, tol, max_iter, pre);
    if (!rep.converged) {
        throw ConvergenceError("PCG failed in rhs family '" + fam.name + "' at step " +
                               std::to_string(current_step) + ": " +
                               std::to_string(rep.iterations) + " iterations, relative residual " +
                               std::to_string(rep.final_relative_residual));
    }
    fam.prev_solution = x;
    fam.has_prev = true;
    ++fam.solves;
    fam.iters_total += rep.iterations;

    // A zero-iteration solve returned its start vector: nothing new for the
    // cascade, and counting it would corrupt the step-to-step iteration
    // history the append rule compares.
    if (fam.mode == StartMode::cspe && rep.iterations > 0) {
        const LinearOperator counted = [this, &A, &fam](std::span<const double> in,
                                                        std::span<double> out) {
            ++fam.knn_products;
            A.apply(in, out);
        };
        fam.sub.update(x, rep.iterations, counted);
    }
    records.push_back({current_step, current_time, fam.name[0], rep.iterations, fam.sub.cols()});
    return std::move(x);
}

Vector schur_apply(const PartitionedSystem& ps, const CsrMatrix& K_cc_current,
                   std::span<const double> x, double tol, SchurWorkspace& ws) {
    if (static_cast<std::int32_t>(x.size()) != ps.n_c) {
        throw DimensionError("schur_apply: vector must live on the conductive dofs");
    }
    const Vector t_air = ps.K_nc.apply(x);
    const Vector kp = ws.solve(ws.coupling, ps.K_nn, t_air, tol, 200000, ws.pre_knn);
    Vector y = K_cc_current.apply(x);
    const Vector back = ps.K_cn.apply(kp);
    k::axpy(-1.0, back, y);
    return y;
}

CflEstimate estimate_cfl(const PartitionedSystem& ps, std::span<const double> a_c, double safety,
                         double tol, std::uint64_t seed, Vector* warm_start, int max_iter) {
    if (!(safety > 0.0 && safety <= 1.0)) throw ModelError("estimate_cfl: safety must be in (0, 1]");
    StepperConfig inner;
    inner.tol_pcg = std::max(tol / 10.0, 1e-14);  // one decade tighter than the eigen tolerance
    inner.mass_mode = ps.mass_mode;
    inner.start_mode = StartMode::cspe;
    SchurWorkspace ws(ps, inner);
    ps.assemble_K_cc(a_c, ws.K_cc, ws.kcc_scratch);

    const LinearOperator op = [&](std::span<const double> x, std::span<double> y) {
        const Vector sx = schur_apply(ps, ws.K_cc, x, inner.tol_pcg, ws);
        if (ps.mass_mode == MassMode::lumped) {
            for (std::size_t i = 0; i < sx.size(); ++i) y[i] = ws.inv_mass_diagonal[i] * sx[i];
        } else {
            const Vector z = ws.solve(ws.mass, ps.M_cc, sx, inner.tol_pcg, 200000, ws.pre_mcc);
            std::copy(z.begin(), z.end(), y.begin());
        }
    };

    const PowerIterationResult pr = power_iteration(op, ps.n_c, tol, max_iter, seed, warm_start);
    CflEstimate est;
    est.lambda_max = pr.lambda_max;
    est.safety = safety;
    est.converged = pr.converged;
    if (!(pr.lambda_max > 0.0)) {
        throw ConvergenceError("estimate_cfl: non-positive spectral estimate " +
                               std::to_string(pr.lambda_max));
    }
    est.dt_max = safety * 2.0 / pr.lambda_max;
    return est;
}

FieldState explicit_euler_step(const PartitionedSystem& ps, const FieldState& state, double dt,
                               const StepperConfig& cfg, SchurWorkspace& ws) {
    if (!(dt > 0.0)) throw ModelError("explicit_euler_step: dt must be positive");
    const double t_next = state.t + dt;
    ws.current_time = t_next;

    // K_nn^# j_sn(t_next): solved once, reused bitwise for the recovery.
    Vector rhs_src(ps.j_sn_pattern);
    k::scale(source_at(ps.waveform, t_next), rhs_src);
    const Vector k_j = ws.solve(ws.source, ps.K_nn, rhs_src, cfg.tol_pcg, cfg.max_pcg_iter,
                                ws.pre_knn);

    // K_nn^# K_cn^T a_c^m (the Schur-complement coupling term).
    const Vector rhs_c1 = ps.K_nc.apply(state.a_c);
    const Vector k_a = ws.solve(ws.coupling, ps.K_nn, rhs_c1, cfg.tol_pcg, cfg.max_pcg_iter,
                                ws.pre_knn);

    // bracket = K_cn (k_a - k_j) - K_cc(a_c^m) a_c^m, i.e. the right-hand
    // side -K_cn K_nn^# j_sn of the Schur ODE minus S a_c. (Block
    // elimination of the DAE fixes the source sign; the update formula is
    // sometimes printed with the opposite one, which relaxes to a
    // sign-flipped equilibrium.)
    ps.assemble_K_cc(state.a_c, ws.K_cc, ws.kcc_scratch);
    Vector diff_air(k_a);
    k::axpy(-1.0, k_j, diff_air);
    Vector bracket = ps.K_cn.apply(diff_air);
    const Vector kcc_ac = ws.K_cc.apply(state.a_c);
    k::axpy(-1.0, kcc_ac, bracket);

    // da = M_cc^{-1} bracket
    Vector da;
    if (ps.mass_mode == MassMode::lumped) {
        da.resize(bracket.size());
        for (std::size_t i = 0; i < da.size(); ++i) da[i] = ws.inv_mass_diagonal[i] * bracket[i];
    } else {
        da = ws.solve(ws.mass, ps.M_cc, bracket, cfg.tol_pcg, cfg.max_pcg_iter, ws.pre_mcc);
    }

    FieldState next;
    next.t = t_next;
    next.a_c = state.a_c;
    k::axpy(dt, da, next.a_c);

    // Air recovery: a_n = K_nn^# j_sn - K_nn^# K_cn^T a_c^{m+1}.
    const Vector rhs_c2 = ps.K_nc.apply(next.a_c);
    const Vector k_b = ws.solve(ws.coupling, ps.K_nn, rhs_c2, cfg.tol_pcg, cfg.max_pcg_iter,
                                ws.pre_knn);
    next.a_n = k_j;
    k::axpy(-1.0, k_b, next.a_n);

    for (double v : next.a_c) {
        if (!std::isfinite(v)) {
            throw InstabilityError("explicit step produced non-finite values at t = " +
                                   std::to_string(t_next));
        }
    }
    return next;
}

namespace {

double inf_norm(const Vector& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

IntegrationResult integrate(const PartitionedSystem& ps, const FieldState& state0, double t_end,
                            const StepperConfig& cfg, std::span<const Probe> probes,
                            SchurWorkspace* external_ws) {
    if (t_end < state0.t) throw ModelError("integrate: t_end precedes the initial time");
    if (static_cast<std::int32_t>(state0.a_c.size()) != ps.n_c ||
        static_cast<std::int32_t>(state0.a_n.size()) != ps.n_n) {
        throw DimensionError("integrate: state dimensions do not match the partition");
    }
    if (cfg.mass_mode != ps.mass_mode) {
        throw ModelError("integrate: StepperConfig mass_mode disagrees with the partition");
    }

    IntegrationResult out;
    for (const Probe& p : probes) out.trajectory.probe_names.push_back(p.name);

    std::unique_ptr<SchurWorkspace> owned;
    if (external_ws == nullptr) {
        owned = std::make_unique<SchurWorkspace>(ps, cfg);
        external_ws = owned.get();
    }
    SchurWorkspace& ws = *external_ws;
    ws.galerkin_budget = cfg.galerkin_audit_samples;

    const auto record_sample = [&](const FieldState& st) {
        Vector row;
        if (!probes.empty()) {
            const Vector a = ps.expand(st.a_c, st.a_n);
            for (const Probe& p : probes) row.push_back(probe_flux(*ps.sys, a, p));
        }
        out.trajectory.push(st.t, std::move(row));
        // Algebraic-constraint residual of the air block equation.
        const double jv = source_at(ps.waveform, st.t);
        Vector resid = ps.K_nc.apply(st.a_c);
        const Vector knn_an = ps.K_nn.apply(st.a_n);
        k::axpy(1.0, knn_an, resid);
        k::axpy(-jv, ps.j_sn_pattern, resid);
        double jn = jv * k::nrm2(ps.j_sn_pattern);
        if (jn > 0.0) {
            out.metrics.max_constraint_ratio =
                std::max(out.metrics.max_constraint_ratio, k::nrm2(resid) / jn);
        }
    };

    const auto wall0 = std::chrono::steady_clock::now();

    const CflEstimate cfl0 =
        estimate_cfl(ps, state0.a_c, cfg.safety, cfg.cfl_tol, cfg.seed, &ws.power_start,
                     cfg.cfl_max_iter);
    double dt = cfg.dt > 0.0 ? cfg.dt : cfl0.dt_max;
    out.metrics.lambda_max0 = cfl0.lambda_max;
    out.metrics.dt_max0 = cfl0.dt_max;
    out.metrics.dt_initial = dt;
    if (cfg.dt > 0.0 && cfg.dt > 2.0 / cfl0.lambda_max * (1.0 + 1e-9)) {
        out.metrics.warnings.push_back("dt = " + std::to_string(cfg.dt) +
                                       " exceeds the stability bound 2/lambda_max = " +
                                       std::to_string(2.0 / cfl0.lambda_max) + "; proceeding");
    }

    FieldState state = state0;
    const double span = t_end - state0.t;
    if (span > 0.0) record_sample(state);  // t_end == t0 yields an empty trajectory

    double ref_scale = 1e-300;
    std::int64_t step = 0;
    while (t_end - state.t > 1e-12 * span && span > 0.0) {
        const double dt_step = std::min(dt, t_end - state.t);
        ws.current_step = step + 1;
        state = explicit_euler_step(ps, state, dt_step, cfg, ws);
        ++step;

        const double s = inf_norm(state.a_c);
        if (step <= 10) {
            ref_scale = std::max(ref_scale, s);
        } else if (s > 1e12 * ref_scale) {
            throw InstabilityError("CFL violation suspected: |a_c| reached " + std::to_string(s) +
                                   " (1e12 x initial scale) at step " + std::to_string(step));
        }

        const bool last = t_end - state.t <= 1e-12 * span;
        if (step % std::max(1, cfg.output_stride) == 0 || last) record_sample(state);

        if (ps.nonlinear && cfg.cfl_recheck_interval > 0 && !last &&
            step % cfg.cfl_recheck_interval == 0) {
            const CflEstimate re = estimate_cfl(ps, state.a_c, cfg.safety, cfg.cfl_tol, cfg.seed,
                                                &ws.power_start, cfg.cfl_max_iter);
            ++out.metrics.cfl_rechecks;
            // Act only above the estimator's noise floor; the safety factor
            // absorbs sub-band drift.
            const double band = std::max(1e-3, 10.0 * cfg.cfl_tol);
            if (dt > re.dt_max * (1.0 + band)) {
                char msg[160];
                std::snprintf(msg, sizeof msg,
                              "CFL bound tightened at step %lld: dt %.6g -> %.6g s",
                              static_cast<long long>(step), dt, re.dt_max);
                out.metrics.warnings.push_back(msg);
                dt = re.dt_max;
            }
        }
    }

    out.metrics.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
    out.metrics.steps = step;
    out.metrics.dt_final = dt;
    out.metrics.max_subspace_cols =
        std::max({ws.source.sub.max_cols_seen(), ws.coupling.sub.max_cols_seen(),
                  ws.mass.sub.max_cols_seen()});
    out.metrics.max_galerkin_ratio =
        std::max({ws.source.max_galerkin_ratio, ws.coupling.max_galerkin_ratio,
                  ws.mass.max_galerkin_ratio});
    out.metrics.galerkin_samples =
        ws.source.galerkin_samples + ws.coupling.galerkin_samples + ws.mass.galerkin_samples;
    out.metrics.knn_products =
        ws.source.knn_products + ws.coupling.knn_products + ws.mass.knn_products;
    out.metrics.accepted_updates = ws.source.sub.accepted_updates() +
                                   ws.coupling.sub.accepted_updates() +
                                   ws.mass.sub.accepted_updates();
    out.metrics.avg_iters_source = ws.source.avg_iters();
    out.metrics.avg_iters_coupling = ws.coupling.avg_iters();
    out.metrics.avg_iters_mass = ws.mass.avg_iters();
    out.metrics.solves_source = ws.source.solves;
    out.metrics.solves_coupling = ws.coupling.solves;
    out.metrics.solves_mass = ws.mass.solves;
    out.final_state = state;
    return out;
}

void write_step_report_csv(const std::string& path,
                           std::span<const SchurWorkspace::SolveRecord> records) {
    std::ofstream out(path);
    if (!out) throw IoError(IoError::Code::file_missing, "cannot write '" + path + "'");
    out << "step,t,rhs_family,pcg_iters,subspace_cols\n";
    char buf[32];
    for (const auto& r : records) {
        std::snprintf(buf, sizeof buf, "%.17g", r.t);
        const char* family = r.family == 's' ? "source" : (r.family == 'c' ? "coupling" : "mass");
        out << r.step << "," << buf << "," << family << "," << r.iters << "," << r.subspace_cols
            << "\n";
    }
}

}  // namespace mqsim
