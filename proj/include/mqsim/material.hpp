#pragma once

#include <numbers>

namespace mqsim {

/// Vacuum reluctivity 1 / mu_0 in m/H.
inline constexpr double kNuVacuum = 1.0 / (4.0e-7 * std::numbers::pi);

/// Reluctivity law nu(B^2). The Brauer exponential model
/// nu = k1 * exp(k2 * B^2) + k3, clamped at the vacuum reluctivity, is the
/// nonlinear option; it is smooth, monotone, and Newton-friendly.
struct MaterialModel {
    enum class Kind { linear, brauer };
    Kind kind = Kind::linear;
    double nu_linear = kNuVacuum;  // m/H
    double k1 = 0.0;               // m/H
    double k2 = 0.0;               // 1/T^2
    double k3 = 0.0;               // m/H

    static MaterialModel linear(double nu);
    static MaterialModel brauer(double k1, double k2, double k3);

    /// Transformer-steel-flavoured default coefficients.
    static MaterialModel brauer_default() { return brauer(0.3774, 2.970, 388.33); }
};

/// nu(B^2) in m/H; clamped to the vacuum value for the Brauer model.
double nu(const MaterialModel& material, double b_squared);

/// d nu / d(B^2); zero for linear materials and in the clamped region.
double nu_derivative(const MaterialModel& material, double b_squared);

}  // namespace mqsim
