#include "analytic_slab.hpp"

#include <cmath>
#include <stdexcept>

#include "mqsim/material.hpp"

namespace oracle {

using mqsim::DiscreteSystem;
using mqsim::GeometryInfo;
using mqsim::kNuVacuum;

SlabDiffusionOracle::SlabDiffusionOracle(const DiscreteSystem& sys, int n_modes) {
    if (sys.geometry.kind != GeometryInfo::Kind::slab) {
        throw std::runtime_error("slab oracle: system is not a slab model");
    }
    if (sys.material.kind != mqsim::MaterialModel::Kind::linear) {
        throw std::runtime_error("slab oracle: linear material required");
    }
    const GeometryInfo& g = sys.geometry;
    length_ = g.length;
    h_ = g.h;
    center_ = 0.5 * g.length;
    a_ = g.slab_begin * h_;
    ell_ = center_ - a_;
    nu_c_ = sys.material.nu_linear;
    kappa_ = g.kappa;
    diffusivity_ = nu_c_ / kappa_;
    amplitude_ = sys.waveform.amplitude;
    tau_ = sys.waveform.tau;

    const double p_lo = g.coil_begin * h_;
    const double p_hi = g.coil_end * h_;
    moment1_ = 0.5 * (p_hi * p_hi - p_lo * p_lo);
    big_r_ = nu_c_ * a_ + kNuVacuum * ell_;
    sigma_ = kNuVacuum / (nu_c_ * a_);

    // Roots of sigma sin(w l) + w cos(w l) = 0, one per ((2k-1)pi/2, k pi).
    const auto f = [&](double w) {
        return sigma_ * std::sin(w * ell_) + w * std::cos(w * ell_);
    };
    omega_.reserve(n_modes);
    for (int k = 1; k <= n_modes; ++k) {
        double lo = ((2 * k - 1) * M_PI / 2.0 + 1e-9) / ell_;
        double hi = (k * M_PI - 1e-12) / ell_;
        double flo = f(lo);
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double fm = f(mid);
            if ((fm > 0.0) == (flo > 0.0)) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        omega_.push_back(0.5 * (lo + hi));
    }

    lambda_.resize(omega_.size());
    coef_q_.resize(omega_.size());
    for (std::size_t k = 0; k < omega_.size(); ++k) {
        const double w = omega_[k];
        lambda_[k] = diffusivity_ * w * w;
        const double swl = std::sin(w * ell_);
        const double cwl = std::cos(w * ell_);
        const double inner = -(swl / (w * w) - ell_ * cwl / w);  // <x - c, phi_k>
        const double norm = ell_ / 2.0 - std::sin(2.0 * w * ell_) / (4.0 * w);
        coef_q_[k] = inner / norm;
    }

    for (int cell = g.slab_begin; cell < g.slab_end; ++cell) {
        probe_midpoints_.push_back((cell + 0.5) * h_);
    }
}

double SlabDiffusionOracle::field_b(double x, double t) const {
    if (x > center_) x = length_ - x;  // mirror symmetry of B
    const double w_t = 1.0 - std::exp(-t / tau_);
    const double m_t = amplitude_ * w_t * moment1_;
    const double gamma = -m_t / big_r_;

    double b = gamma;  // quasi-static part: u_qs = gamma (x - c), B_qs = gamma
    const double drive = amplitude_ * moment1_ / (big_r_ * tau_);
    for (std::size_t k = 0; k < omega_.size(); ++k) {
        const double lam = lambda_[k];
        double time_factor;
        if (std::abs(lam * tau_ - 1.0) > 1e-8) {
            time_factor = (std::exp(-t / tau_) - std::exp(-lam * t)) / (lam - 1.0 / tau_);
        } else {
            time_factor = t * std::exp(-t / tau_);
        }
        const double t_k = coef_q_[k] * drive * time_factor;
        const double dphi = -omega_[k] * std::cos(omega_[k] * (center_ - x));
        b += t_k * dphi;
        if (std::abs(t_k) * omega_[k] < 1e-14 * std::abs(gamma) && k > 8) break;
    }
    return b;
}

double SlabDiffusionOracle::probe_average(double t) const {
    double acc = 0.0;
    for (double x : probe_midpoints_) acc += std::abs(field_b(x, t));
    return acc / static_cast<double>(probe_midpoints_.size());
}

}  // namespace oracle
