#pragma once

#include <functional>
#include <span>

#include "mqsim/csr.hpp"

namespace mqsim {

/// y = A x for an abstract symmetric positive-(semi)definite operator.
using LinearOperator = std::function<void(std::span<const double>, std::span<double>)>;

LinearOperator make_operator(const CsrMatrix& A);

struct Preconditioner {
    enum class Kind { identity, jacobi };
    Kind kind = Kind::identity;
    Vector inverse_diagonal;  // present iff jacobi

    static Preconditioner identity() { return {}; }

    /// z = M^{-1} r
    void apply(std::span<const double> r, std::span<double> z) const;
};

/// Jacobi preconditioner from the matrix diagonal. Throws SingularError
/// naming the row if a diagonal entry is zero or negative.
Preconditioner build_jacobi(const CsrMatrix& A);

/// Jacobi when every diagonal entry is strictly positive, identity otherwise
/// (imported curl-curl blocks may carry zero diagonals).
Preconditioner build_jacobi_or_identity(const CsrMatrix& A);

struct PcgReport {
    int iterations = 0;
    double final_relative_residual = 0.0;
    bool converged = false;
};

struct PcgResult {
    Vector x;
    PcgReport report;
};

/// Preconditioned conjugate gradients for SPD / consistent SPSD systems.
///
/// Stops when ||b - A x||_2 <= tol * ||b||_2. b = 0 returns x = 0
/// immediately; a start vector that already satisfies the criterion is
/// returned unchanged with 0 iterations. Running out of iterations returns
/// the best iterate seen with converged = false; non-finite values throw
/// ConvergenceError.
PcgResult pcg(const LinearOperator& apply_A, std::span<const double> b, std::span<const double> x0,
              double tol, int max_iter, const Preconditioner& pre);

}  // namespace mqsim
