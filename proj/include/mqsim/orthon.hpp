#pragma once

#include <optional>
#include <span>

#include "mqsim/csr.hpp"

namespace mqsim {

/// Orthonormalizes v_new against the (already orthonormal) columns V by
/// modified Gram-Schmidt with one re-orthogonalization sweep.
///
/// Returns the unit vector, or nothing when the post-projection norm drops
/// below drop_tol * ||v_new|| (numerically dependent column) or v_new = 0.
std::optional<Vector> mgs_orthonormalize(std::span<const Vector> V, std::span<const double> v_new,
                                         double drop_tol = 1e-12);

}  // namespace mqsim
