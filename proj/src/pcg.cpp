#include "mqsim/pcg.hpp"

#include <cmath>
#include <string>

#include "mqsim/errors.hpp"
#include "mqsim/kernels.hpp"

namespace mqsim {

LinearOperator make_operator(const CsrMatrix& A) {
    return [&A](std::span<const double> x, std::span<double> y) { A.apply(x, y); };
}

void Preconditioner::apply(std::span<const double> r, std::span<double> z) const {
    if (kind == Kind::identity) {
        std::copy(r.begin(), r.end(), z.begin());
        return;
    }
    if (r.size() != inverse_diagonal.size()) {
        throw DimensionError("preconditioner: vector length mismatch");
    }
    for (std::size_t i = 0; i < r.size(); ++i) z[i] = inverse_diagonal[i] * r[i];
}

Preconditioner build_jacobi(const CsrMatrix& A) {
    Preconditioner pre;
    pre.kind = Preconditioner::Kind::jacobi;
    const Vector d = A.diagonal_vector();
    pre.inverse_diagonal.resize(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (!(d[i] > 0.0)) {
            throw SingularError("build_jacobi: non-positive diagonal entry at row " +
                                std::to_string(i));
        }
        pre.inverse_diagonal[i] = 1.0 / d[i];
    }
    return pre;
}

Preconditioner build_jacobi_or_identity(const CsrMatrix& A) {
    for (double v : A.diagonal_vector()) {
        if (!(v > 0.0)) return Preconditioner::identity();
    }
    return build_jacobi(A);
}

PcgResult pcg(const LinearOperator& apply_A, std::span<const double> b, std::span<const double> x0,
              double tol, int max_iter, const Preconditioner& pre) {
    namespace k = kernels;
    const std::size_t n = b.size();
    if (x0.size() != n) throw DimensionError("pcg: start vector length mismatch");
    if (!(tol > 0.0)) throw ConvergenceError("pcg: tolerance must be positive");

    PcgResult out;
    out.x.assign(n, 0.0);

    const double norm_b = k::nrm2(b);
    if (norm_b == 0.0) {
        out.report.converged = true;
        return out;  // x = 0 by convention for a zero right-hand side
    }

    Vector& x = out.x;
    std::copy(x0.begin(), x0.end(), x.begin());

    Vector r(b.begin(), b.end());
    Vector ax(n);
    apply_A(x, ax);
    k::axpy(-1.0, ax, r);

    double res_norm = k::nrm2(r);
    if (!std::isfinite(res_norm)) throw ConvergenceError("pcg: non-finite residual at start");
    if (res_norm <= tol * norm_b) {
        out.report.converged = true;
        out.report.final_relative_residual = res_norm / norm_b;
        return out;
    }

    Vector z(n), p(n), ap(n);
    pre.apply(r, z);
    std::copy(z.begin(), z.end(), p.begin());
    double rz = k::dot(r, z);

    Vector best_x = x;
    double best_res = res_norm;

    for (int it = 1; it <= max_iter; ++it) {
        apply_A(p, ap);
        const double pap = k::dot(p, ap);
        if (!std::isfinite(pap)) throw ConvergenceError("pcg: non-finite curvature");
        if (pap <= 0.0) {
            // Semidefinite operator and the search direction left its range
            // (or the rhs was inconsistent); report the best iterate.
            out.x = best_x;
            out.report.iterations = it - 1;
            out.report.final_relative_residual = best_res / norm_b;
            out.report.converged = false;
            return out;
        }
        const double alpha = rz / pap;
        k::axpy(alpha, p, x);
        k::axpy(-alpha, ap, r);

        res_norm = k::nrm2(r);
        if (!std::isfinite(res_norm)) throw ConvergenceError("pcg: non-finite residual");
        if (res_norm < best_res) {
            best_res = res_norm;
            best_x = x;
        }
        if (res_norm <= tol * norm_b) {
            out.report.iterations = it;
            out.report.final_relative_residual = res_norm / norm_b;
            out.report.converged = true;
            return out;
        }

        pre.apply(r, z);
        const double rz_next = k::dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        k::axpby(1.0, z, beta, p);
    }

    out.x = best_x;
    out.report.iterations = max_iter;
    out.report.final_relative_residual = best_res / norm_b;
    out.report.converged = false;
    return out;
}

}  // namespace mqsim
