#include "mqsim/orthon.hpp"

#include "mqsim/errors.hpp"
#include "mqsim/kernels.hpp"

namespace mqsim {

std::optional<Vector> mgs_orthonormalize(std::span<const Vector> V, std::span<const double> v_new,
                                         double drop_tol) {
    namespace k = kernels;
    if (!(drop_tol > 0.0)) throw DimensionError("mgs: drop tolerance must be positive");

    const double norm_in = k::nrm2(v_new);
    if (norm_in == 0.0) return std::nullopt;

    Vector v(v_new.begin(), v_new.end());
    // Two MGS sweeps; the second repairs the orthogonality loss a single
    // sweep leaves behind for nearly dependent inputs.
    for (int sweep = 0; sweep < 2; ++sweep) {
        for (const Vector& q : V) {
            if (q.size() != v.size()) throw DimensionError("mgs: column length mismatch");
            const double proj = k::dot(q, v);
            k::axpy(-proj, q, v);
        }
    }

    const double norm_out = k::nrm2(v);
    if (norm_out < drop_tol * norm_in) return std::nullopt;
    k::scale(1.0 / norm_out, v);
    return v;
}

}  // namespace mqsim
