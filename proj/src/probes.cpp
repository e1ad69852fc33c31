#include "mqsim/probes.hpp"

#include <cmath>

#include "mqsim/errors.hpp"

namespace mqsim {

double probe_flux(const DiscreteSystem& sys, std::span<const double> a_global, const Probe& probe) {
    if (probe.indices.empty()) throw ModelError("probe '" + probe.name + "' is empty");
    if (!probe.weights.empty() && probe.weights.size() != probe.indices.size()) {
        throw DimensionError("probe '" + probe.name + "': weight/index length mismatch");
    }
    double acc = 0.0, total_w = 0.0;
    for (std::size_t k = 0; k < probe.indices.size(); ++k) {
        const double w = probe.weights.empty() ? 1.0 : probe.weights[k];
        const std::int32_t idx = probe.indices[k];
        double value = 0.0;
        if (probe.kind == Probe::Kind::cell_flux) {
            if (!sys.mesh) throw ModelError("cell_flux probe on a system without mesh data");
            if (idx < 0 || idx >= static_cast<std::int32_t>(sys.mesh->cells.size())) {
                throw DimensionError("probe cell index out of range");
            }
            value = std::sqrt(sys.mesh->cell_b_squared(idx, a_global));
        } else {
            if (idx < 0 || idx >= sys.n_dofs) throw DimensionError("probe dof index out of range");
            value = a_global[idx];
        }
        acc += w * value;
        total_w += w;
    }
    if (total_w == 0.0) throw ModelError("probe '" + probe.name + "' has zero total weight");
    return acc / total_w;
}

}  // namespace mqsim
