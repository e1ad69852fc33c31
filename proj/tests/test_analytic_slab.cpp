#include <doctest.h>

#include <cmath>
#include <vector>

#include "analytic_slab.hpp"
#include "mqsim/system.hpp"

using namespace mqsim;

namespace {

// Independent validator: P1/implicit-Euler integration of the full-domain
// continuum problem on its own fine grid, tridiagonal Thomas solves only.
// Shares nothing with the library solvers or the series oracle.
struct TridiagonalValidator {
    int n;
    double h, kappa, nu_c, amplitude, tau;
    int s0, s1, c0, c1;  // slab and left-coil cell ranges on THIS grid

    std::vector<double> a;  // interior nodes

    TridiagonalValidator(const DiscreteSystem& sys, int n_fine) : n(n_fine) {
        const GeometryInfo& g = sys.geometry;
        h = g.length / n;
        kappa = g.kappa;
        nu_c = sys.material.nu_linear;
        amplitude = sys.waveform.amplitude;
        tau = sys.waveform.tau;
        const double ratio = static_cast<double>(n) / g.n_cells;
        s0 = static_cast<int>(std::lround(g.slab_begin * ratio));
        s1 = n - s0;
        c0 = static_cast<int>(std::lround(g.coil_begin * ratio));
        c1 = static_cast<int>(std::lround(g.coil_end * ratio));
        a.assign(n - 1, 0.0);
    }

    bool conducting(int cell) const { return cell >= s0 && cell < s1; }
    double nu_cell(int cell) const { return conducting(cell) ? nu_c : kNuVacuum; }

    void advance(double t_next, double dt) {
        // (M/dt + K) a = M/dt a_prev + j(t_next), P1 consistent mass.
        const int m = n - 1;
        std::vector<double> lower(m, 0.0), diag(m, 0.0), upper(m, 0.0), rhs(m, 0.0);
        const double jv = amplitude * (1.0 - std::exp(-t_next / tau));
        std::vector<double> mass_l(m, 0.0), mass_d(m, 0.0), mass_u(m, 0.0);
        for (int cell = 0; cell < n; ++cell) {
            const double k_e = nu_cell(cell) / h;
            const double kap = conducting(cell) ? kappa : 0.0;
            const int left = cell - 1, right = cell;  // interior dof ids
            if (left >= 0) {
                diag[left] += k_e;
                mass_d[left] += 2.0 * kap * h / 6.0;
            }
            if (right < m) {
                diag[right] += k_e;
                mass_d[right] += 2.0 * kap * h / 6.0;
            }
            if (left >= 0 && right < m) {
                upper[left] -= k_e;
                lower[right] -= k_e;
                mass_u[left] += kap * h / 6.0;
                mass_l[right] += kap * h / 6.0;
            }
            double pol = 0.0;
            if (cell >= c0 && cell < c1) pol = 1.0;
            if (cell >= n - c1 && cell < n - c0) pol = -1.0;
            if (pol != 0.0) {
                if (left >= 0) rhs[left] += pol * jv * h / 2.0;
                if (right < m) rhs[right] += pol * jv * h / 2.0;
            }
        }
        for (int i = 0; i < m; ++i) {
            rhs[i] += (mass_l[i] * (i > 0 ? a[i - 1] : 0.0) + mass_d[i] * a[i] +
                       mass_u[i] * (i + 1 < m ? a[i + 1] : 0.0)) /
                      dt;
            diag[i] += mass_d[i] / dt;
            lower[i] += mass_l[i] / dt;
            upper[i] += mass_u[i] / dt;
        }
        // Thomas
        for (int i = 1; i < m; ++i) {
            const double w = lower[i] / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        a[m - 1] = rhs[m - 1] / diag[m - 1];
        for (int i = m - 2; i >= 0; --i) a[i] = (rhs[i] - upper[i] * a[i + 1]) / diag[i];
    }

    /// avg |B| over slab cells at midpoints
    double probe() const {
        double acc = 0.0;
        for (int cell = s0; cell < s1; ++cell) {
            const double al = cell - 1 >= 0 ? a[cell - 1] : 0.0;
            const double ar = cell < n - 1 ? a[cell] : 0.0;
            acc += std::abs((ar - al) / h);
        }
        return acc / (s1 - s0);
    }
};

}  // namespace

TEST_CASE("analytic slab oracle agrees with an independent fine-grid integrator") {
    const SourceWaveform wave{1e5, 5e-3};
    const DiscreteSystem sys =
        build_slab_model(32, 0.5, 0.25, 5.96e7, MaterialModel::linear(kNuVacuum), wave);
    const oracle::SlabDiffusionOracle series(sys);

    TridiagonalValidator fd(sys, 512);
    const double t_end = 0.05;
    const double dt = 2e-5;
    double t = 0.0;
    double worst = 0.0, peak = 0.0;
    int step = 0;
    while (t < t_end - 1e-12) {
        t += dt;
        fd.advance(t, dt);
        ++step;
        if (step % 250 == 0) {
            // pointwise |B| over the validator's own slab-cell midpoints
            for (int cell = fd.s0; cell < fd.s1; ++cell) {
                const double x = (cell + 0.5) * fd.h;
                const double al = cell - 1 >= 0 ? fd.a[cell - 1] : 0.0;
                const double ar = cell < fd.n - 1 ? fd.a[cell] : 0.0;
                const double got = (ar - al) / fd.h;
                const double want = series.field_b(x, t);
                worst = std::max(worst, std::abs(got - want));
                peak = std::max(peak, std::abs(want));
            }
        }
    }
    REQUIRE(peak > 0.0);
    CHECK(worst / peak <= 5e-3);  // FD discretization error dominates
}

TEST_CASE("analytic slab oracle: late-time field is uniform across the slab") {
    const SourceWaveform wave{1e5, 1e-3};
    const DiscreteSystem sys =
        build_slab_model(64, 0.5, 0.25, 5.96e7, MaterialModel::linear(kNuVacuum), wave);
    const oracle::SlabDiffusionOracle series(sys);
    const double t_late = 40.0 * series.diffusion_time();
    const GeometryInfo& g = sys.geometry;
    const double b_left = series.field_b((g.slab_begin + 0.5) * g.h, t_late);
    const double b_mid = series.field_b(0.5 * g.length - 0.5 * g.h, t_late);
    CHECK(b_left == doctest::Approx(b_mid).epsilon(1e-6));
    CHECK(std::abs(b_left) > 0.0);
}
