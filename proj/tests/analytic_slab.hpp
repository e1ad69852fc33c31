#pragma once

// Analytic series solution for field penetration into the 1D slab model:
// ramped coil drive, linear material. Test-side oracle, fully independent of
// the library's solvers.
//
// By mirror antisymmetry the problem reduces to the half domain [0, L/2]
// with A(L/2) = 0. The air column [0, a] responds quasi-statically and
// couples to the conductor [a, L/2] through a Robin condition
//     nu_c dA/dx(a) = [nu0 A(a) - m(t)] / a,
// where m(t) is the first moment of the coil current density over the air
// column. Conductor diffusion is expanded in the Sturm-Liouville modes
// sin(omega_k (L/2 - x)) with tan(omega_k l) = -omega_k / sigma (roots by
// bisection), driven by the quasi-static lift of the (1 - exp(-t/tau)) ramp;
// every time integral is closed-form.

#include <vector>

#include "mqsim/system.hpp"

namespace oracle {

class SlabDiffusionOracle {
  public:
    /// Reads the realized slab geometry/material from a built system
    /// (linear material required).
    explicit SlabDiffusionOracle(const mqsim::DiscreteSystem& sys, int n_modes = 400);

    /// Signed B = dA/dx inside the conductor; x is folded across the center
    /// by the mirror symmetry, so any point in [a, L - a] is valid.
    double field_b(double x, double t) const;

    /// Average of |B| over the slab cells' midpoints (the built-in probe).
    double probe_average(double t) const;

    double diffusion_time() const { return ell_ * ell_ / diffusivity_; }

  private:
    double length_, h_, a_, center_, ell_;
    double nu_c_, kappa_, diffusivity_;
    double amplitude_, tau_;
    double moment1_;  // coil first moment for unit drive
    double big_r_;    // nu_c a + nu0 l
    double sigma_;    // nu0 / (nu_c a)
    std::vector<double> omega_, lambda_, coef_q_;
    std::vector<double> probe_midpoints_;
};

}  // namespace oracle
