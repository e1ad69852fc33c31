#include "mqsim/cspe.hpp"

#include <algorithm>
#include <cmath>

#include "mqsim/errors.hpp"
#include "mqsim/kernels.hpp"
#include "mqsim/orthon.hpp"

namespace mqsim {

SubspaceOperator::SubspaceOperator(int max_cols, int n_cg_acc, bool conjunctive_gate)
    : max_cols_(max_cols), n_cg_acc_(n_cg_acc), conjunctive_gate_(conjunctive_gate) {
    if (max_cols < 1) throw DimensionError("SubspaceOperator: max_cols must be >= 1");
    if (n_cg_acc < 1) throw DimensionError("SubspaceOperator: n_cg_acc must be >= 1");
}

Vector SubspaceOperator::start_vector(std::span<const double> r) const {
    namespace k = kernels;
    Vector x0(r.size(), 0.0);
    if (v_.empty()) return x0;

    const int m = cols();
    Vector rhs(m);
    for (int i = 0; i < m; ++i) rhs[i] = k::dot(v_[i], r);
    Vector z;
    try {
        z = dense_solve(g_, rhs);
    } catch (const SingularError&) {
        throw SingularError("spe_start_vector: projected matrix is singular (degenerate subspace)");
    }
    for (int i = 0; i < m; ++i) k::axpy(z[i], v_[i], x0);
    return x0;
}

double SubspaceOperator::projected_residual(std::span<const double> r,
                                            std::span<const double> z) const {
    namespace k = kernels;
    const int m = cols();
    double s = 0.0;
    for (int i = 0; i < m; ++i) {
        double gi = k::dot(v_[i], r);
        for (int j = 0; j < m; ++j) gi -= g_.at(i, j) * z[j];
        s += gi * gi;
    }
    return std::sqrt(s);
}

void SubspaceOperator::push_history(int iters) {
    if (history_len_ < 2) {
        history_[history_len_++] = iters;
    } else {
        history_[0] = history_[1];
        history_[1] = iters;
    }
}

void SubspaceOperator::rebuild_g_row_col(int k) {
    namespace ker = kernels;
    for (int i = 0; i < cols(); ++i) {
        // v_i^T (A v_k); symmetry fills the mirrored entry without a product.
        const double gik = ker::dot(v_[i], w_[k]);
        g_.at(i, k) = gik;
        g_.at(k, i) = gik;
    }
}

void SubspaceOperator::update(std::span<const double> solution, int last_iters,
                              const LinearOperator& apply_A) {
    const int prev_iters = history_len_ > 0 ? history_[history_len_ - 1] : -1;
    bool append = v_.empty();
    if (!append) {
        const bool grew = prev_iters < 0 || last_iters > prev_iters;
        const bool above_gate = !conjunctive_gate_ || last_iters > n_cg_acc_;
        append = grew && above_gate && cols() < max_cols_;
    }

    // Orthonormalize against the columns that will remain: on replacement the
    // discarded last column must not participate, or its component of the new
    // solution would be lost and the span would stop containing it.
    const std::size_t keep = append ? v_.size() : v_.size() - 1;
    const auto v_new = mgs_orthonormalize({v_.data(), keep}, solution, 1e-12);
    if (!v_new.has_value()) {
        ++rejected_updates_;
        push_history(last_iters);
        return;  // dependent on the surviving span; nothing to learn
    }

    if (append) {
        const int k = cols();
        v_.push_back(*v_new);
        w_.emplace_back(v_new->size());
        apply_A(v_.back(), w_.back());
        ++products_computed_;
        DenseMatrix g_next(k + 1);
        for (int i = 0; i < k; ++i) {
            for (int j = 0; j < k; ++j) g_next.at(i, j) = g_.at(i, j);
        }
        g_ = g_next;
        rebuild_g_row_col(k);
    } else {
        const int k = cols() - 1;
        v_[k] = *v_new;
        apply_A(v_[k], w_[k]);
        ++products_computed_;
        rebuild_g_row_col(k);
    }
    ++accepted_updates_;
    max_cols_seen_ = std::max(max_cols_seen_, cols());
    push_history(last_iters);
}

SubspaceOperator::Audit SubspaceOperator::audit(const LinearOperator& apply_A) const {
    namespace k = kernels;
    Audit a;
    a.cols = cols();
    if (v_.empty()) return a;

    double g_scale = std::max(g_.max_abs(), 1e-300);
    std::vector<Vector> w_fresh(v_.size());
    for (int i = 0; i < cols(); ++i) {
        w_fresh[i].resize(v_[i].size());
        apply_A(v_[i], w_fresh[i]);
        double num = 0.0;
        for (std::size_t p = 0; p < w_fresh[i].size(); ++p) {
            num = std::max(num, std::abs(w_fresh[i][p] - w_[i][p]));
        }
        const double den = std::max({k::nrm2(w_fresh[i]), 1e-300});
        a.max_w_deviation = std::max(a.max_w_deviation, num / den);
    }
    for (int i = 0; i < cols(); ++i) {
        for (int j = 0; j < cols(); ++j) {
            const double fresh = k::dot(v_[i], w_fresh[j]);
            a.max_g_deviation = std::max(a.max_g_deviation, std::abs(fresh - g_.at(i, j)) / g_scale);
        }
    }
    return a;
}

Vector spe_start_vector(const SubspaceOperator& sub, std::span<const double> r) {
    return sub.start_vector(r);
}

SubspaceOperator::Audit subspace_audit(const SubspaceOperator& sub, const CsrMatrix& K_nn) {
    return sub.audit(make_operator(K_nn));
}

}  // namespace mqsim
