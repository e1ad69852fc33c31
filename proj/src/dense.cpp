#include "mqsim/dense.hpp"

#include <cmath>
#include <string>

#include "mqsim/errors.hpp"

namespace mqsim {

double DenseMatrix::max_abs() const {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

std::vector<double> dense_solve(const DenseMatrix& A, std::span<const double> b) {
    const int n = A.n;
    if (static_cast<int>(b.size()) != n) throw DimensionError("dense_solve: rhs length mismatch");
    const double pivot_floor = 1e-14 * A.max_abs();

    // Lower Cholesky factor, in place on a copy.
    DenseMatrix L = A;
    for (int j = 0; j < n; ++j) {
        double d = L.at(j, j);
        for (int k = 0; k < j; ++k) d -= L.at(j, k) * L.at(j, k);
        if (!(d > pivot_floor)) {
            throw SingularError("dense_solve: pivot " + std::to_string(d) + " at row " +
                                std::to_string(j) + " below threshold (matrix not SPD)");
        }
        const double ljj = std::sqrt(d);
        L.at(j, j) = ljj;
        for (int i = j + 1; i < n; ++i) {
            double s = L.at(i, j);
            for (int k = 0; k < j; ++k) s -= L.at(i, k) * L.at(j, k);
            L.at(i, j) = s / ljj;
        }
    }

    std::vector<double> x(b.begin(), b.end());
    for (int i = 0; i < n; ++i) {
        double s = x[i];
        for (int k = 0; k < i; ++k) s -= L.at(i, k) * x[k];
        x[i] = s / L.at(i, i);
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = x[i];
        for (int k = i + 1; k < n; ++k) s -= L.at(k, i) * x[k];
        x[i] = s / L.at(i, i);
    }
    return x;
}

}  // namespace mqsim
