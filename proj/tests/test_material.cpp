#include <doctest.h>

#include <cmath>

#include "mqsim/errors.hpp"
#include "mqsim/material.hpp"
#include "mqsim/waveform.hpp"

using namespace mqsim;

TEST_CASE("nu: brauer curve values and clamp") {
    const MaterialModel m = MaterialModel::brauer_default();
    CHECK(nu(m, 0.0) == doctest::Approx(0.3774 + 388.33).epsilon(1e-14));
    CHECK(nu(m, 1e6) == kNuVacuum);  // deep clamp
    const double want = std::min(0.3774 * std::exp(2.970) + 388.33, kNuVacuum);
    CHECK(want == doctest::Approx(395.68).epsilon(1e-4));
    CHECK(nu(m, 1.0) == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("nu: monotone non-decreasing and positive") {
    const MaterialModel m = MaterialModel::brauer(49.4, 1.46, 520.6);
    double prev = 0.0;
    for (double b2 = 0.0; b2 <= 40.0; b2 += 0.25) {
        const double v = nu(m, b2);
        CHECK(v > 0.0);
        CHECK(v >= prev);
        CHECK(v <= kNuVacuum);
        prev = v;
    }
}

TEST_CASE("nu_derivative: linear is zero, brauer matches analytic form") {
    const MaterialModel lin = MaterialModel::linear(100.0);
    CHECK(nu_derivative(lin, 0.0) == 0.0);
    CHECK(nu_derivative(lin, 7.0) == 0.0);

    const MaterialModel m = MaterialModel::brauer_default();
    CHECK(nu_derivative(m, 2.0) ==
          doctest::Approx(0.3774 * 2.970 * std::exp(2.970 * 2.0)).epsilon(1e-14));
    CHECK(nu_derivative(m, 1e6) == 0.0);  // clamped region
}

TEST_CASE("nu_derivative matches central finite differences away from the clamp") {
    const MaterialModel m = MaterialModel::brauer(49.4, 1.46, 520.6);
    for (double b2 : {0.0, 0.3, 1.0, 2.5, 4.0}) {
        const double h = 1e-6 * (1.0 + b2);
        const double fd = (nu(m, b2 + h) - nu(m, std::max(b2 - h, 0.0))) /
                          (h + std::min(b2, h));
        const double an = nu_derivative(m, b2);
        CHECK(an == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("material constructors validate coefficients") {
    CHECK_THROWS_AS(MaterialModel::brauer(-1.0, 2.0, 3.0), ModelError);
    CHECK_THROWS_AS(MaterialModel::linear(0.0), ModelError);
}

TEST_CASE("source_at: ramp endpoints and tau point") {
    const SourceWaveform w{2.0, 0.5};
    CHECK(source_at(w, 0.0) == 0.0);
    CHECK(source_at(w, 1e9) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(source_at(w, 0.5) == doctest::Approx(2.0 * (1.0 - std::exp(-1.0))).epsilon(1e-14));
    CHECK(source_at(w, 0.5) == doctest::Approx(2.0 * 0.6321205588285577).epsilon(1e-12));

    // non-decreasing
    double prev = -1.0;
    for (double t = 0.0; t < 3.0; t += 0.01) {
        const double v = source_at(w, t);
        CHECK(v >= prev);
        prev = v;
    }
}
