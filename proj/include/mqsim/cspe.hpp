#pragma once

#include <span>

#include "mqsim/dense.hpp"
#include "mqsim/pcg.hpp"

namespace mqsim {

/// Start vectors for a sequence of solves with a fixed SPD/SPSD operator A
/// and drifting right-hand sides: a Galerkin projection onto the span of
/// past solutions, maintained cascade-style.
///
/// State: orthonormal columns V, cached products W_i = A v_i, and the small
/// projected matrix G = V^T W. Each accepted update costs exactly one new
/// operator-column product; everything else is reused.
class SubspaceOperator {
  public:
    /// `conjunctive_gate` = append only when the iteration count grew AND
    /// exceeded n_cg_acc (the default policy); false drops the n_cg_acc
    /// condition (growth alone decides).
    SubspaceOperator(int max_cols, int n_cg_acc, bool conjunctive_gate = true);

    int cols() const { return static_cast<int>(v_.size()); }
    bool empty() const { return v_.empty(); }
    int max_cols() const { return max_cols_; }
    int n_cg_acc() const { return n_cg_acc_; }

    /// Galerkin start vector x0 = V z with (V^T A V) z = V^T r.
    /// Empty subspace returns the zero vector. Throws SingularError if the
    /// projected matrix is degenerate (audit the basis).
    Vector start_vector(std::span<const double> r) const;

    /// Projected residual norm ||V^T r - G z|| of the latest start vector
    /// recipe, using cached quantities only.
    double projected_residual(std::span<const double> r, std::span<const double> x0_coeffs) const;

    /// Cascade update with the newest converged solution. Orthonormalizes it
    /// against V (a rejected/dependent vector leaves the state untouched and
    /// consumes nothing); then appends when the iteration count grew (and the
    /// gates allow), otherwise replaces the last column. `apply_A` is invoked
    /// exactly once per accepted update.
    void update(std::span<const double> solution, int last_iters, const LinearOperator& apply_A);

    struct Audit {
        double max_w_deviation = 0.0;  // relative, against recomputed A v_i
        double max_g_deviation = 0.0;  // relative, against recomputed V^T A V
        int cols = 0;
    };
    /// Recomputes W and G from scratch via `apply_A` (pass the raw operator,
    /// not an instrumented one) and reports the worst cache deviations.
    Audit audit(const LinearOperator& apply_A) const;

    // Instrumentation for the cascade cost accounting.
    long products_computed() const { return products_computed_; }
    long accepted_updates() const { return accepted_updates_; }
    long rejected_updates() const { return rejected_updates_; }
    int max_cols_seen() const { return max_cols_seen_; }
    std::span<const int> iter_history() const {
        return {history_.data(), static_cast<std::size_t>(history_len_)};
    }
    const std::vector<Vector>& basis() const { return v_; }

  private:
    int max_cols_;
    int n_cg_acc_;
    bool conjunctive_gate_;
    std::vector<Vector> v_;
    std::vector<Vector> w_;
    DenseMatrix g_;
    std::array<int, 2> history_{0, 0};  // last two PCG iteration counts (older first)
    int history_len_ = 0;
    long products_computed_ = 0;
    long accepted_updates_ = 0;
    long rejected_updates_ = 0;
    int max_cols_seen_ = 0;

    void push_history(int iters);
    void rebuild_g_row_col(int k);
};

/// Free-function views matching the operation-level surface.
Vector spe_start_vector(const SubspaceOperator& sub, std::span<const double> r);
SubspaceOperator::Audit subspace_audit(const SubspaceOperator& sub, const CsrMatrix& K_nn);

}  // namespace mqsim
