#pragma once

#include <span>

#include "mqsim/system.hpp"

namespace mqsim {

/// Weighted average of |B| (cell_flux probes; |B| is the square root of the
/// cell-averaged squared discrete curl) or of solution values (dof_value
/// probes, the only kind available on imported systems).
double probe_flux(const DiscreteSystem& sys, std::span<const double> a_global, const Probe& probe);

}  // namespace mqsim
