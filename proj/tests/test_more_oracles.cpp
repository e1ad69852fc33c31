#include <doctest.h>

#include <cmath>
#include <memory>

#include "analytic_slab.hpp"
#include "mqsim/errors.hpp"
#include "mqsim/implicit.hpp"
#include "mqsim/schur.hpp"
#include "oracles.hpp"

using namespace mqsim;

TEST_CASE("plate: zero source keeps the trajectory identically zero") {
    auto sys = std::make_shared<DiscreteSystem>(build_plate_model_2d(
        10, 10, PlateGeometry{}, 1e7, MaterialModel::linear(1000.0), SourceWaveform{0.0, 1e-3}));
    auto ps = partition(sys);
    StepperConfig cfg;
    cfg.dt = 1e-5;
    FieldState st0{0.0, Vector(ps.n_c, 0.0), Vector(ps.n_n, 0.0)};
    const auto out = integrate(ps, st0, 5e-5, cfg, sys->probes);
    for (const auto& row : out.trajectory.values) {
        for (double v : row) CHECK(v == 0.0);
    }
    for (double v : out.final_state.a_c) CHECK(v == 0.0);
    for (double v : out.final_state.a_n) CHECK(v == 0.0);
}

TEST_CASE("plate 16x16 linear: implicit path matches a dense implicit-Euler oracle") {
    const DiscreteSystem sys = build_plate_model_2d(16, 16, PlateGeometry{}, 1e7,
                                                    MaterialModel::linear(2000.0),
                                                    SourceWaveform{1e5, 1e-3});
    const double dt = 2e-4;
    NewtonConfig cfg;
    cfg.tol_newton = 1e-12;
    cfg.tol_linear = 1e-13;
    cfg.regularization_eps = 0.0;  // direct DAE solve; K_nn block is regular here

    // Dense oracle: (M/dt + K) a_{m+1} = M/dt a_m + j(t_{m+1}).
    const oracle::Mat K = oracle::from_csr(sys.K_linear);
    const oracle::Mat M = oracle::from_csr(sys.M);
    const int n = sys.n_dofs;
    oracle::Mat A = oracle::zeros(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) A[i][j] = M[i][j] / dt + K[i][j];
    }
    oracle::Vec a_ref(n, 0.0);
    Vector a(n, 0.0);
    ImplicitWorkspace ws(sys, cfg);
    for (int step = 1; step <= 10; ++step) {
        const double t = step * dt;
        a = implicit_euler_step(sys, a, t, dt, cfg, nullptr, &ws);
        const double jv = 1e5 * (1.0 - std::exp(-t / 1e-3));
        oracle::Vec rhs = oracle::matvec(M, a_ref);
        for (int i = 0; i < n; ++i) rhs[i] = rhs[i] / dt + jv * sys.source_pattern[i];
        a_ref = oracle::lu_solve(A, rhs);
    }
    CHECK(oracle::rel_err(a, a_ref) <= 1e-8);
}

TEST_CASE("implicit: first-order convergence against the analytic slab solution") {
    const SourceWaveform wave{1e5, 5e-3};
    const DiscreteSystem sys =
        build_slab_model(128, 0.5, 0.25, 5.96e7, MaterialModel::linear(kNuVacuum), wave);
    const oracle::SlabDiffusionOracle series(sys);
    const double t_end = 0.02;

    NewtonConfig cfg;
    const auto final_error = [&](double dt) {
        const auto out = integrate_implicit(sys, Vector(sys.n_dofs, 0.0), t_end, dt, cfg,
                                            sys.probes, 1 << 20);
        const double got = out.trajectory.values.back()[0];
        const double want = series.probe_average(t_end);
        return std::abs(got - want) / std::abs(want);
    };
    // dt large enough that the time error dominates the O(h^2) floor
    const double e1 = final_error(2e-3);
    const double e2 = final_error(1e-3);
    const double order = std::log2(e1 / e2);
    CHECK(order >= 0.8);
    CHECK(order <= 1.2);
}

TEST_CASE("implicit: direct DAE solve (eps = 0) matches the regularized run") {
    const MaterialModel steel = MaterialModel::brauer(49.4, 1.46, 520.6);
    const DiscreteSystem sys =
        build_slab_model(16, 0.1, 0.3, 1e7, steel, SourceWaveform{2e5, 1e-3});
    NewtonConfig reg;  // auto eps
    NewtonConfig direct;
    direct.regularization_eps = 0.0;
    const auto a = integrate_implicit(sys, Vector(sys.n_dofs, 0.0), 5e-3, 2.5e-4, reg, sys.probes);
    const auto b =
        integrate_implicit(sys, Vector(sys.n_dofs, 0.0), 5e-3, 2.5e-4, direct, sys.probes);
    const double pa = a.trajectory.values.back()[0];
    const double pb = b.trajectory.values.back()[0];
    CHECK(std::abs(pa - pb) <= 1e-6 * std::abs(pa));
}

TEST_CASE("pcg: non-finite input is reported as an error") {
    const CsrMatrix I = CsrMatrix::identity(3);
    const Vector b{1.0, std::numeric_limits<double>::infinity(), 0.0};
    const Vector x0(3, 0.0);
    CHECK_THROWS_AS(pcg(make_operator(I), b, x0, 1e-10, 10, Preconditioner::identity()),
                    ConvergenceError);
}
