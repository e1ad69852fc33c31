#include "mqsim/implicit.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "mqsim/errors.hpp"
#include "mqsim/kernels.hpp"
#include "mqsim/probes.hpp"
#include "mqsim/waveform.hpp"

namespace mqsim {

namespace k = kernels;

namespace {

std::int64_t find_slot(const CsrMatrix& P, std::int32_t row, std::int32_t col) {
    for (std::int64_t s = P.row_ptr[row]; s < P.row_ptr[row + 1]; ++s) {
        if (P.col_idx[s] == col) return s;
    }
    return -1;
}

}  // namespace

ImplicitWorkspace::ImplicitWorkspace(const DiscreteSystem& sys, const NewtonConfig& cfg) {
    if (sys.mesh) {
        plan = std::make_shared<const EdgeCellMesh::JacobianPlan>(sys.mesh->build_jacobian_plan());
        jacobian = plan->pattern;
    } else {
        // Constant K: the Newton matrix pattern is the union of M and K.
        std::vector<Triplet> trips;
        for (std::int32_t r = 0; r < sys.n_dofs; ++r) {
            for (std::int64_t s = sys.K_linear.row_ptr[r]; s < sys.K_linear.row_ptr[r + 1]; ++s) {
                trips.push_back({r, sys.K_linear.col_idx[s], 0.0});
            }
            for (std::int64_t s = sys.M.row_ptr[r]; s < sys.M.row_ptr[r + 1]; ++s) {
                trips.push_back({r, sys.M.col_idx[s], 0.0});
            }
            trips.push_back({r, r, 0.0});
        }
        jacobian = CsrMatrix::from_triplets(sys.n_dofs, sys.n_dofs, trips);
        k_slots.reserve(sys.K_linear.values.size());
        for (std::int32_t r = 0; r < sys.n_dofs; ++r) {
            for (std::int64_t s = sys.K_linear.row_ptr[r]; s < sys.K_linear.row_ptr[r + 1]; ++s) {
                k_slots.push_back(find_slot(jacobian, r, sys.K_linear.col_idx[s]));
            }
        }
    }

    mass_slots.reserve(sys.M.values.size());
    for (std::int32_t r = 0; r < sys.n_dofs; ++r) {
        for (std::int64_t s = sys.M.row_ptr[r]; s < sys.M.row_ptr[r + 1]; ++s) {
            mass_slots.push_back(find_slot(jacobian, r, sys.M.col_idx[s]));
        }
    }
    diag_slots.resize(sys.n_dofs);
    for (std::int32_t r = 0; r < sys.n_dofs; ++r) diag_slots[r] = find_slot(jacobian, r, r);

    double max_mass_diag = 0.0;
    for (double v : sys.M.diagonal_vector()) max_mass_diag = std::max(max_mass_diag, v);
    const double eps =
        cfg.regularization_eps < 0.0 ? 1e-10 * max_mass_diag : cfg.regularization_eps;
    reg_diagonal.assign(sys.n_dofs, 0.0);
    for (std::int32_t i = 0; i < sys.n_dofs; ++i) {
        if (!sys.conductive_mask[i]) reg_diagonal[i] = eps;
    }

    k_values_scratch.assign(sys.K_linear.values.size(), 0.0);
}

Vector implicit_residual(const DiscreteSystem& sys, const ImplicitWorkspace& ws,
                         std::span<const double> a, std::span<const double> a_prev, double dt,
                         std::span<const double> j_vec) {
    // F = M_reg (a - a_prev)/dt + K(a) a - j
    Vector diff(a.begin(), a.end());
    k::axpy(-1.0, a_prev, diff);
    Vector F = sys.M.apply(diff);
    for (std::int32_t i = 0; i < sys.n_dofs; ++i) F[i] += ws.reg_diagonal[i] * diff[i];
    k::scale(1.0 / dt, F);

    CsrMatrix K = sys.K_linear;  // pattern reuse; values overwritten below
    Vector kv(sys.K_linear.values.size());
    sys.assemble_K_values(a, kv);
    K.values = std::move(kv);
    const Vector Ka = K.apply(a);
    k::axpy(1.0, Ka, F);
    k::axpy(-1.0, j_vec, F);
    return F;
}

namespace {

void assemble_newton_matrix(const DiscreteSystem& sys, ImplicitWorkspace& ws,
                            std::span<const double> a, double dt) {
    auto& J = ws.jacobian;
    if (ws.plan) {
        sys.mesh->assemble_jacobian_values(*ws.plan, sys.material, a, J.values);
    } else {
        std::fill(J.values.begin(), J.values.end(), 0.0);
        for (std::size_t s = 0; s < sys.K_linear.values.size(); ++s) {
            J.values[ws.k_slots[s]] += sys.K_linear.values[s];
        }
    }
    const double inv_dt = 1.0 / dt;
    for (std::size_t s = 0; s < sys.M.values.size(); ++s) {
        J.values[ws.mass_slots[s]] += inv_dt * sys.M.values[s];
    }
    for (std::int32_t i = 0; i < sys.n_dofs; ++i) {
        J.values[ws.diag_slots[i]] += inv_dt * ws.reg_diagonal[i];
    }
}

}  // namespace

Vector implicit_jacobian_apply(const DiscreteSystem& sys, ImplicitWorkspace& ws,
                               std::span<const double> a, double dt, std::span<const double> d) {
    assemble_newton_matrix(sys, ws, a, dt);
    return ws.jacobian.apply(d);
}

Vector implicit_euler_step(const DiscreteSystem& sys, std::span<const double> a_prev,
                           double t_next, double dt, const NewtonConfig& cfg, NewtonReport* report,
                           ImplicitWorkspace* ws_ext) {
    if (!(dt > 0.0)) throw ModelError("implicit_euler_step: dt must be positive");
    std::unique_ptr<ImplicitWorkspace> owned;
    if (ws_ext == nullptr) {
        owned = std::make_unique<ImplicitWorkspace>(sys, cfg);
        ws_ext = owned.get();
    }
    ImplicitWorkspace& ws = *ws_ext;

    Vector j_vec(sys.source_pattern);
    k::scale(source_at(sys.waveform, t_next), j_vec);

    // Residual scale: the larger of the drive and the inertia term.
    Vector m_ap = sys.M.apply(a_prev);
    for (std::int32_t i = 0; i < sys.n_dofs; ++i) m_ap[i] += ws.reg_diagonal[i] * a_prev[i];
    const double scale = std::max({k::nrm2(j_vec), k::nrm2(m_ap) / dt, 1e-300});

    Vector a(a_prev.begin(), a_prev.end());
    NewtonReport local;
    NewtonReport& rep = report ? *report : local;
    rep = NewtonReport{};

    Vector F = implicit_residual(sys, ws, a, a_prev, dt, j_vec);
    double res = k::nrm2(F);
    rep.residual_norms.push_back(res);
    if (cfg.record_iterates) rep.iterates.push_back(a);

    int growth_streak = 0;
    while (res > cfg.tol_newton * scale) {
        if (rep.iterations >= cfg.max_newton_iter) {
            throw ConvergenceError("Newton did not converge in " +
                                   std::to_string(cfg.max_newton_iter) + " iterations (residual " +
                                   std::to_string(res / scale) + " of scale)");
        }
        assemble_newton_matrix(sys, ws, a, dt);
        k::scale(-1.0, F);
        const Vector start = ws.has_prev ? ws.prev_newton_solution : Vector(a.size(), 0.0);
        const auto [delta, lin] = pcg(make_operator(ws.jacobian), F, start, cfg.tol_linear,
                                      cfg.max_linear_iter, build_jacobi(ws.jacobian));
        if (!lin.converged) {
            throw ConvergenceError("Newton inner linear solve failed (relative residual " +
                                   std::to_string(lin.final_relative_residual) + ")");
        }
        ws.prev_newton_solution = delta;
        ws.has_prev = true;
        rep.linear_iters += lin.iterations;
        k::axpy(1.0, delta, a);
        ++rep.iterations;

        F = implicit_residual(sys, ws, a, a_prev, dt, j_vec);
        const double next_res = k::nrm2(F);
        growth_streak = next_res > res ? growth_streak + 1 : 0;
        if (growth_streak >= 3) {
            throw ConvergenceError("Newton diverged: residual grew three consecutive iterations");
        }
        res = next_res;
        rep.residual_norms.push_back(res);
        if (cfg.record_iterates) rep.iterates.push_back(a);
    }
    return a;
}

IntegrationResult integrate_implicit(const DiscreteSystem& sys, const Vector& a0, double t_end,
                                     double dt, const NewtonConfig& cfg,
                                     std::span<const Probe> probes, int output_stride) {
    if (static_cast<std::int32_t>(a0.size()) != sys.n_dofs) {
        throw DimensionError("integrate_implicit: state length mismatch");
    }
    IntegrationResult out;
    for (const Probe& p : probes) out.trajectory.probe_names.push_back(p.name);

    const auto record = [&](double t, const Vector& a) {
        Vector row;
        for (const Probe& p : probes) row.push_back(probe_flux(sys, a, p));
        out.trajectory.push(t, std::move(row));
    };

    const auto wall0 = std::chrono::steady_clock::now();
    ImplicitWorkspace ws(sys, cfg);
    Vector a = a0;
    double t = 0.0;
    const double span = t_end;
    if (span > 0.0) record(t, a);
    std::int64_t step = 0;
    NewtonReport rep;
    while (t_end - t > 1e-12 * span && span > 0.0) {
        const double dt_step = std::min(dt, t_end - t);
        t += dt_step;
        a = implicit_euler_step(sys, a, t, dt_step, cfg, &rep, &ws);
        ++step;
        out.metrics.newton_iters_total += rep.iterations;
        const bool last = t_end - t <= 1e-12 * span;
        if (step % std::max(1, output_stride) == 0 || last) record(t, a);
    }
    out.metrics.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
    out.metrics.steps = step;
    out.metrics.dt_initial = dt;
    out.metrics.dt_final = dt;
    out.final_state.t = t;
    out.final_state.a_c = a;  // global vector; partition-free path
    return out;
}

}  // namespace mqsim
