#pragma once

#include <span>
#include <vector>

namespace mqsim {

/// Small dense symmetric matrix, row-major. Used only for projected CSPE
/// systems and similar subspace-sized problems.
struct DenseMatrix {
    int n = 0;
    std::vector<double> a;

    DenseMatrix() = default;
    explicit DenseMatrix(int dim) : n(dim), a(static_cast<std::size_t>(dim) * dim, 0.0) {}

    double& at(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
    double at(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }

    double max_abs() const;
};

/// Solves A x = b for a small SPD matrix by Cholesky factorization.
/// Throws SingularError when a pivot falls below 1e-14 * max|A| (degenerate
/// subspace signal).
std::vector<double> dense_solve(const DenseMatrix& A, std::span<const double> b);

}  // namespace mqsim
