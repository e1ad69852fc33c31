#include "mqsim/power_iteration.hpp"

#include <cmath>

#include "mqsim/errors.hpp"
#include "mqsim/kernels.hpp"

namespace mqsim {

namespace {

// splitmix64: platform-independent deterministic start vectors.
double unit_random(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z = z ^ (z >> 31);
    return static_cast<double>(z >> 11) * 0x1.0p-53 - 0.5;
}

}  // namespace

PowerIterationResult power_iteration(const LinearOperator& apply_A, int n, double tol, int max_iter,
                                     std::uint64_t seed, Vector* start) {
    namespace k = kernels;
    if (n < 1) throw DimensionError("power_iteration: operator dimension must be >= 1");

    Vector x(static_cast<std::size_t>(n));
    bool seeded = false;
    if (start != nullptr && static_cast<int>(start->size()) == n) {
        const double norm = k::nrm2(*start);
        if (norm > 0.0 && std::isfinite(norm)) {
            x = *start;
            k::scale(1.0 / norm, x);
            seeded = true;
        }
    }
    if (!seeded) {
        std::uint64_t state = seed;
        for (double& v : x) v = unit_random(state);
        k::scale(1.0 / k::nrm2(x), x);
    }

    PowerIterationResult out;
    Vector y(static_cast<std::size_t>(n));
    double lambda_prev = 0.0;
    double diff_prev = -1.0;

    for (int it = 1; it <= max_iter; ++it) {
        apply_A(x, y);
        const double lambda = k::dot(x, y);  // x has unit norm
        if (!std::isfinite(lambda)) throw ConvergenceError("power_iteration: non-finite value");
        const double norm_y = k::nrm2(y);
        out.lambda_max = lambda;
        out.iterations = it;

        if (norm_y == 0.0) {  // exact null vector: the operator is (locally) zero
            out.lambda_max = 0.0;
            out.converged = true;
            break;
        }

        if (it > 1) {
            const double diff = std::abs(lambda - lambda_prev);
            const double scale = std::max(std::abs(lambda), 1e-300);
            if (diff == 0.0) {
                out.converged = true;
            } else if (diff_prev > 0.0) {
                // Geometric extrapolation of the remaining Rayleigh-quotient
                // drift; a plain successive-difference test stops too early
                // when the spectral gap is small.
                double rate = diff / diff_prev;
                rate = std::min(rate, 0.99);
                const double err_est = diff * rate / (1.0 - rate);
                if (err_est <= tol * scale && diff <= tol * scale) out.converged = true;
            }
            diff_prev = diff;
            if (out.converged) break;
        }
        lambda_prev = lambda;

        std::copy(y.begin(), y.end(), x.begin());
        k::scale(1.0 / norm_y, x);
    }

    if (start != nullptr) *start = x;
    return out;
}

}  // namespace mqsim
