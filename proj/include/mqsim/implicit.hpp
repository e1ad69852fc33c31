#pragma once

#include "mqsim/schur.hpp"
#include "mqsim/system.hpp"

namespace mqsim {

struct NewtonConfig {
    double tol_newton = 1e-8;  // relative residual
    int max_newton_iter = 30;
    double tol_linear = 1e-11;
    int max_linear_iter = 200000;
    /// Tiny conductivity added to air-dof mass diagonals; negative = auto
    /// (1e-10 * max mass diagonal), 0 = solve the DAE directly.
    double regularization_eps = -1.0;
    bool record_iterates = false;
};

struct NewtonReport {
    int iterations = 0;
    std::vector<double> residual_norms;  // ||F|| after each iterate (index 0 = initial)
    long linear_iters = 0;
    std::vector<Vector> iterates;  // filled when record_iterates
};

/// Reusable Newton-matrix plan and scratch for a fixed system and dt.
class ImplicitWorkspace {
  public:
    ImplicitWorkspace(const DiscreteSystem& sys, const NewtonConfig& cfg);

    CsrMatrix jacobian;  // values rewritten every iteration
    Vector reg_diagonal;  // eps on air dofs, 0 elsewhere
    std::vector<std::int64_t> mass_slots;  // M value slot -> jacobian slot
    std::vector<std::int64_t> diag_slots;  // per-dof diagonal slot
    std::shared_ptr<const EdgeCellMesh::JacobianPlan> plan;  // null for constant K
    std::vector<std::int64_t> k_slots;  // K_linear slot -> jacobian slot (constant-K path)
    Vector k_values_scratch;
    Vector prev_newton_solution;  // start vector for the inner PCG solves
    bool has_prev = false;
};

/// Solves (M_reg/dt + K(a)) a = M_reg/dt a_prev + j_s(t_next) by
/// Newton-Raphson with the exact Jacobian (chain rule through nu(B^2)) and
/// Jacobi-PCG inner solves. The residual is driven below
/// tol_newton * max(||j_s||, ||M_reg a_prev||/dt). Divergence (three
/// consecutive residual increases) and inner-solve failures throw.
Vector implicit_euler_step(const DiscreteSystem& sys, std::span<const double> a_prev,
                           double t_next, double dt, const NewtonConfig& cfg,
                           NewtonReport* report = nullptr, ImplicitWorkspace* ws = nullptr);

/// Implicit-Euler integration on the unpartitioned system; probe recording
/// matches the explicit path (same trajectory CSV schema).
IntegrationResult integrate_implicit(const DiscreteSystem& sys, const Vector& a0, double t_end,
                                     double dt, const NewtonConfig& cfg,
                                     std::span<const Probe> probes, int output_stride = 1);

/// F(a) = M_reg (a - a_prev)/dt + K(a) a - j; exposed for Jacobian tests.
Vector implicit_residual(const DiscreteSystem& sys, const ImplicitWorkspace& ws,
                         std::span<const double> a, std::span<const double> a_prev, double dt,
                         std::span<const double> j_vec);

/// J(a) d for the assembled Newton matrix; exposed for Jacobian tests.
Vector implicit_jacobian_apply(const DiscreteSystem& sys, ImplicitWorkspace& ws,
                               std::span<const double> a, double dt, std::span<const double> d);

}  // namespace mqsim
