#include "mqsim/material.hpp"

#include <cmath>

#include "mqsim/errors.hpp"

namespace mqsim {

MaterialModel MaterialModel::linear(double nu) {
    if (!(nu > 0.0)) throw ModelError("linear material requires nu > 0");
    MaterialModel m;
    m.kind = Kind::linear;
    m.nu_linear = nu;
    return m;
}

MaterialModel MaterialModel::brauer(double k1, double k2, double k3) {
    if (!(k1 > 0.0 && k2 > 0.0 && k3 > 0.0)) {
        throw ModelError("brauer material requires k1, k2, k3 > 0");
    }
    MaterialModel m;
    m.kind = Kind::brauer;
    m.k1 = k1;
    m.k2 = k2;
    m.k3 = k3;
    return m;
}

double nu(const MaterialModel& material, double b_squared) {
    if (material.kind == MaterialModel::Kind::linear) return material.nu_linear;
    const double raw = material.k1 * std::exp(material.k2 * b_squared) + material.k3;
    return raw < kNuVacuum ? raw : kNuVacuum;
}

double nu_derivative(const MaterialModel& material, double b_squared) {
    if (material.kind == MaterialModel::Kind::linear) return 0.0;
    const double raw = material.k1 * std::exp(material.k2 * b_squared) + material.k3;
    if (raw >= kNuVacuum) return 0.0;  // clamped region
    return material.k1 * material.k2 * std::exp(material.k2 * b_squared);
}

}  // namespace mqsim
