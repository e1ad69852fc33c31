#pragma once

#include <cstdint>

#include "mqsim/pcg.hpp"

namespace mqsim {

struct PowerIterationResult {
    double lambda_max = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Dominant eigenvalue of an operator similar to a symmetric
/// positive-semidefinite matrix, by power iteration with a
/// Rayleigh-quotient stopping test.
///
/// The start vector is pseudo-random from a fixed seed so repeated
/// estimates are reproducible; `start` (when non-null, length n) overrides
/// it, which warm-starts repeated estimates of a slowly drifting operator.
/// Convergence is declared when the geometric extrapolation of the Rayleigh
/// quotient's successive differences falls below tol * |lambda|; a zero
/// operator returns 0 immediately.
PowerIterationResult power_iteration(const LinearOperator& apply_A, int n, double tol, int max_iter,
                                     std::uint64_t seed = 2026u, Vector* start = nullptr);

}  // namespace mqsim
