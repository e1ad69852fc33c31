#include <doctest.h>

#include <cmath>

#include "mqsim/kernels.hpp"
#include "oracles.hpp"

using namespace mqsim;

namespace {

struct BackendGuard {
    kernels::Backend saved;
    BackendGuard() : saved(kernels::active_backend()) {}
    ~BackendGuard() { kernels::set_backend(saved); }
};

}  // namespace

TEST_CASE("kernels: scalar and simd lanes agree") {
    BackendGuard guard;
    if (!kernels::backend_available(kernels::Backend::avx2)) {
        MESSAGE("avx2 lane not available on this machine; lane-equivalence skipped");
        return;
    }
    oracle::Rng rng(71);
    // Sizes straddling the 4-wide blocking, including remainders.
    for (int n : {1, 2, 3, 4, 5, 7, 8, 15, 16, 17, 63, 64, 67, 256}) {
        const oracle::Vec x = rng.vector(n);
        const oracle::Vec y = rng.vector(n);
        const double a = rng.uniform(-2.0, 2.0);
        const double b = rng.uniform(-2.0, 2.0);

        REQUIRE(kernels::set_backend(kernels::Backend::scalar));
        const double dot_s = kernels::dot(x, y);
        Vector axpy_s = y;
        kernels::axpy(a, x, axpy_s);
        Vector axpby_s = y;
        kernels::axpby(a, x, b, axpby_s);
        Vector scale_s = x;
        kernels::scale(a, scale_s);

        REQUIRE(kernels::set_backend(kernels::Backend::avx2));
        const double dot_v = kernels::dot(x, y);
        Vector axpy_v = y;
        kernels::axpy(a, x, axpy_v);
        Vector axpby_v = y;
        kernels::axpby(a, x, b, axpby_v);
        Vector scale_v = x;
        kernels::scale(a, scale_v);

        // Reductions may differ by reassociation only.
        CHECK(std::abs(dot_v - dot_s) <= 1e-13 * (1.0 + std::abs(dot_s) + double(n)));
        // Elementwise kernels are bitwise identical (no FMA in either lane).
        for (int i = 0; i < n; ++i) {
            CHECK(axpy_v[i] == axpy_s[i]);
            CHECK(axpby_v[i] == axpby_s[i]);
            CHECK(scale_v[i] == scale_s[i]);
        }
    }
}

TEST_CASE("kernels: spmv lanes agree on random sparse matrices") {
    BackendGuard guard;
    if (!kernels::backend_available(kernels::Backend::avx2)) return;
    oracle::Rng rng(72);
    for (int n : {1, 3, 9, 20, 33}) {
        oracle::Mat D = oracle::zeros(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (rng.uniform() < 0.4) D[i][j] = rng.uniform(-3.0, 3.0);
            }
        }
        const CsrMatrix A = oracle::csr_from_dense(D);
        const oracle::Vec x = rng.vector(n);

        Vector ys(n), yv(n);
        REQUIRE(kernels::set_backend(kernels::Backend::scalar));
        A.apply(x, ys);
        REQUIRE(kernels::set_backend(kernels::Backend::avx2));
        A.apply(x, yv);
        for (int i = 0; i < n; ++i) {
            CHECK(std::abs(yv[i] - ys[i]) <= 1e-13 * (1.0 + std::abs(ys[i])));
        }
    }
}

TEST_CASE("kernels: each lane is deterministic across repeated calls") {
    BackendGuard guard;
    oracle::Rng rng(73);
    const oracle::Vec x = rng.vector(101);
    const oracle::Vec y = rng.vector(101);
    for (kernels::Backend b : {kernels::Backend::scalar, kernels::Backend::avx2}) {
        if (!kernels::backend_available(b)) continue;
        REQUIRE(kernels::set_backend(b));
        const double d1 = kernels::dot(x, y);
        const double d2 = kernels::dot(x, y);
        CHECK(d1 == d2);
        CHECK(kernels::nrm2(x) == kernels::nrm2(x));
    }
}
