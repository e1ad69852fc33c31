#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mqsim/power_iteration.hpp"
#include "oracles.hpp"

using namespace mqsim;

TEST_CASE("power_iteration: diagonal operator") {
    const CsrMatrix A = CsrMatrix::diagonal(Vector{1.0, 2.0, 3.0});
    const auto r = power_iteration(make_operator(A), 3, 1e-10, 1000);
    CHECK(r.converged);
    CHECK(r.lambda_max == doctest::Approx(3.0).epsilon(1e-8));
}

TEST_CASE("power_iteration: 1D Laplacian analytic eigenvalue") {
    const int n = 10;
    const CsrMatrix A = oracle::laplacian_1d(n);
    const auto r = power_iteration(make_operator(A), n, 1e-10, 20000);
    CHECK(r.converged);
    const double exact = 2.0 - 2.0 * std::cos(n * std::numbers::pi / (n + 1));
    CHECK(exact == doctest::Approx(3.9189859472289947).epsilon(1e-10));  // 2(1 + cos(pi/11))
    CHECK(r.lambda_max == doctest::Approx(exact).epsilon(1e-8));
}

TEST_CASE("power_iteration: zero operator returns zero") {
    const CsrMatrix Z(4, 4);
    const auto r = power_iteration(make_operator(Z), 4, 1e-10, 100);
    CHECK(r.converged);
    CHECK(r.lambda_max == 0.0);
}

TEST_CASE("power_iteration: converges to 1e-6 with strong spectral gap") {
    oracle::Rng rng(51);
    for (int trial = 0; trial < 3; ++trial) {
        const int n = 12;
        // Symmetric matrix with eigenvalues {10, <= 8.5} via congruence.
        oracle::Mat M = rng.spd(n, 1.0);
        oracle::Eigen e = oracle::jacobi_eigen(M);
        // Rescale spectrum into [0.5, 8.5] and pin the top at 10 (gap >= 0.15).
        const double lo = e.values.front(), hi = e.values.back();
        oracle::Mat S = oracle::zeros(n, n);
        for (int k = 0; k < n; ++k) {
            double lam = 0.5 + 8.0 * (e.values[k] - lo) / (hi - lo);
            if (k == n - 1) lam = 10.0;
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) S[i][j] += lam * e.vectors[i][k] * e.vectors[j][k];
            }
        }
        const CsrMatrix A = oracle::csr_from_dense(S, 1e-300);
        const auto r = power_iteration(make_operator(A), n, 1e-8, 5000);
        CHECK(r.converged);
        CHECK(std::abs(r.lambda_max - 10.0) / 10.0 <= 1e-6);
    }
}

TEST_CASE("power_iteration: deterministic and warm-startable") {
    const CsrMatrix A = oracle::laplacian_1d(15);
    const auto r1 = power_iteration(make_operator(A), 15, 1e-8, 10000);
    const auto r2 = power_iteration(make_operator(A), 15, 1e-8, 10000);
    CHECK(r1.lambda_max == r2.lambda_max);
    CHECK(r1.iterations == r2.iterations);

    Vector carry;
    const auto cold = power_iteration(make_operator(A), 15, 1e-8, 10000, 2026u, &carry);
    const auto warm = power_iteration(make_operator(A), 15, 1e-8, 10000, 2026u, &carry);
    CHECK(warm.converged);
    CHECK(warm.iterations < cold.iterations);
    CHECK(warm.lambda_max == doctest::Approx(cold.lambda_max).epsilon(1e-7));
}
