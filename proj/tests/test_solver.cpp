#include <gtest/gtest.h>

#include <array>
#include <cmath>

#include "densiflow/error.hpp"
#include "densiflow/fft.hpp"
#include "densiflow/initial.hpp"
#include "densiflow/solver.hpp"

using namespace densiflow;

namespace {

SolverConfig fixed_step(double dt, double T, double nu = 0.05, int stride = 1) {
    SolverConfig cfg;
    cfg.nu = nu;
    cfg.dt = dt;
    cfg.cfl.reset();
    cfg.T = T;
    cfg.snapshot_stride = stride;
    return cfg;
}

InitialData initial(InitialKind kind, int n, double amplitude = 1.0, std::uint64_t seed = 1) {
    InitialParams p;
    p.amplitude = amplitude;
    if (kind == InitialKind::RandomBandlimited || kind == InitialKind::DensityBlobMix) p.kmax = std::min(8, n / 4);
    return make_initial(kind, p, seed, GridSpec::make(n), DensityBounds{});
}

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no exception";
    return ErrorCode::IoError;
}

}  // namespace

TEST(SolverConfig, Validation) {
    SolverConfig c;
    EXPECT_NO_THROW(c.validate());
    c.nu = -1.0;
    EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::BadParams);
    c = SolverConfig{};
    c.dt = 1e-3;
    EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::BadParams);
    c = SolverConfig{};
    c.pressure_tol = 1e-5;
    EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::BadParams);
    c = SolverConfig{};
    c.bounds = {2.0, 1.0};
    EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::BadParams);
}

TEST(MakeInitial, TaylorGreenFormula) {
    const InitialData d = initial(InitialKind::TaylorGreen, 16, 2.0);
    const double h = d.rho.grid().spacing();
    for (int i = 0; i < 16; i += 3)
        for (int j = 0; j < 16; j += 5) {
            EXPECT_NEAR(d.u.x(i, j), 2.0 * std::sin(i * h) * std::cos(j * h), 1e-14);
            EXPECT_NEAR(d.u.y(i, j), -2.0 * std::cos(i * h) * std::sin(j * h), 1e-14);
            EXPECT_EQ(d.rho(i, j), 1.0);
        }
}

TEST(MakeInitial, ConstantVelocity) {
    const InitialData d = initial(InitialKind::ConstantVelocity, 32, 0.7);
    EXPECT_EQ(d.u.x.min(), 0.7);
    EXPECT_EQ(d.u.x.max(), 0.7);
    EXPECT_EQ(norm(d.u.y, kInf), 0.0);
    EXPECT_GE(d.rho.min(), 0.5);
    EXPECT_LE(d.rho.max(), 2.0);
    EXPECT_GT(d.rho.max() - d.rho.min(), 0.5);
}

TEST(MakeInitial, RandomBandlimitedProperties) {
    const InitialData a = initial(InitialKind::RandomBandlimited, 64, 1.0, 1);
    EXPECT_LE(norm(divergence(a.u), kInf), 1e-12);
    EXPECT_GE(a.rho.min(), 0.5);
    EXPECT_LE(a.rho.max(), 2.0);
    const InitialData b = initial(InitialKind::RandomBandlimited, 64, 1.0, 1);
    EXPECT_EQ(norm(a.u.x - b.u.x, kInf), 0.0);
    EXPECT_EQ(norm(a.rho - b.rho, kInf), 0.0);
    const InitialData c = initial(InitialKind::RandomBandlimited, 64, 1.0, 2);
    EXPECT_GT(norm(a.u.x - c.u.x, kInf), 1e-3);
}

TEST(MakeInitial, IndependentOfResolution) {
    InitialParams p;
    const InitialData a = make_initial(InitialKind::DensityBlobMix, p, 3, GridSpec::make(32), DensityBounds{});
    const InitialData b = make_initial(InitialKind::DensityBlobMix, p, 3, GridSpec::make(64), DensityBounds{});
    for (int i = 0; i < 32; i += 3)
        for (int j = 0; j < 32; j += 7) {
            EXPECT_NEAR(a.u.x(i, j), b.u.x(2 * i, 2 * j), 1e-12);
            EXPECT_NEAR(a.rho(i, j), b.rho(2 * i, 2 * j), 1e-12);
        }
}

TEST(MakeInitial, BadParams) {
    InitialParams p;
    p.rho_lo = 0.1;
    EXPECT_EQ(code_of([&] { make_initial(InitialKind::RandomBandlimited, p, 1, GridSpec::make(32), {}); }),
              ErrorCode::BadParams);
    EXPECT_EQ(code_of([] { parse_initial_kind("vortex_sheet"); }), ErrorCode::BadParams);
}

TEST(Pressure, ConstantCoefficientSolveIsExact) {
    const GridSpec g = GridSpec::make(32);
    const ScalarField f = ScalarField::from_function(g, [](double x, double y) { return std::cos(x) * std::sin(2 * y); });
    const ScalarField sigma(g, 2.0);
    const Spectrum b = apply_variable_poisson(sigma, forward(f));
    Spectrum x(g);
    const PcgResult r = solve_variable_poisson(sigma, b, x, 1e-12, 50);
    EXPECT_LE(r.iterations, 2);
    EXPECT_LE(norm(inverse(x) - f, kInf), 1e-12);
}

TEST(Pressure, VariableCoefficientConverges) {
    const InitialData d = initial(InitialKind::RandomBandlimited, 32);
    ScalarField sigma = d.rho;
    for (double& v : sigma.values()) v = 1.0 / v;
    const ScalarField f = dealias(ScalarField::from_function(sigma.grid(), [](double x, double y) {
        return std::sin(x + y) + 0.3 * std::cos(3 * x);
    }));
    const Spectrum b = apply_variable_poisson(sigma, forward(f));
    Spectrum x(sigma.grid());
    const PcgResult r = solve_variable_poisson(sigma, b, x, 1e-11, 200);
    EXPECT_LE(r.relative_residual, 1e-11);
    EXPECT_LE(norm(inverse(x) - f, kInf), 1e-8);
}

TEST(Pressure, TaylorGreenPressureAndAcceleration) {
    // With rho = 1 the pressure of u = (sin x cos y, -cos x sin y) is (cos 2x + cos 2y) / 4
    // and du/dt = nu Laplacian u = -2 nu u.
    const InitialData d = initial(InitialKind::TaylorGreen, 32);
    SolverConfig cfg = fixed_step(1e-3, 1.0, 0.1);
    const ScalarField p = consistent_pressure(d.rho, d.u, cfg);
    const ScalarField exact = ScalarField::from_function(
        d.rho.grid(), [](double x, double y) { return 0.25 * (std::cos(2 * x) + std::cos(2 * y)); });
    EXPECT_LE(norm(p - exact, kInf), 1e-10);
    EXPECT_LE(std::abs(mean(p)), 1e-13);
    const State s{0.0, d.rho, d.u, p};
    const VectorField2 a = acceleration(s, cfg);
    EXPECT_LE(norm(a + 0.2 * d.u, kInf), 1e-9);
}

TEST(Step, ZeroVelocityIsEquilibrium) {
    const InitialData d = initial(InitialKind::RandomBandlimited, 32);
    const GridSpec& g = d.rho.grid();
    const State s0{0.0, d.rho, VectorField2(g), ScalarField(g)};
    const State s1 = step(s0, 1e-2, fixed_step(1e-2, 1.0));
    EXPECT_DOUBLE_EQ(s1.t, 1e-2);
    EXPECT_LE(norm(s1.rho - d.rho, kInf), 1e-14);
    EXPECT_LE(norm(s1.u, kInf), 1e-14);
}

TEST(Step, TaylorGreenOneStepDecay) {
    const InitialData d = initial(InitialKind::TaylorGreen, 32);
    const double nu = 0.1, dt = 1e-3;
    const SolverConfig cfg = fixed_step(dt, 1.0, nu);
    const State s0{0.0, d.rho, d.u, consistent_pressure(d.rho, d.u, cfg)};
    const State s1 = step(s0, dt, cfg);
    const VectorField2 exact = std::exp(-2 * nu * dt) * d.u;
    EXPECT_LE(norm(s1.u - exact, kInf), dt * dt);
}

TEST(Step, CflViolation) {
    const InitialData d = initial(InitialKind::TaylorGreen, 32, 5.0);
    const SolverConfig cfg = fixed_step(0.5, 1.0);
    EXPECT_EQ(code_of([&] { run(d.rho, d.u, cfg); }), ErrorCode::CFLViolation);
}

TEST(Run, ZeroHorizonGivesSingleState) {
    const InitialData d = initial(InitialKind::TaylorGreen, 16);
    const Trajectory tr = run(d.rho, d.u, fixed_step(1e-2, 0.0));
    ASSERT_EQ(tr.states.size(), 1u);
    EXPECT_EQ(tr.diagnostics.size(), 1u);
}

TEST(Run, StrideAndStateInvariants) {
    const InitialData d = initial(InitialKind::RandomBandlimited, 32);
    SolverConfig cfg = fixed_step(5e-3, 0.1, 0.05, 3);
    const Trajectory tr = run(d.rho, d.u, cfg);
    EXPECT_EQ(tr.diagnostics.size(), 21u);
    // Steps 0, 3, ..., 18 and the final step 20.
    ASSERT_EQ(tr.states.size(), 8u);
    EXPECT_DOUBLE_EQ(tr.states.back().t, 0.1);
    const std::vector<double> t = tr.times();
    for (std::size_t k = 1; k < t.size(); ++k) EXPECT_GT(t[k], t[k - 1]);
    for (const State& s : tr.states) {
        EXPECT_GE(s.rho.min(), cfg.bounds.c0 - 1e-12);
        EXPECT_LE(s.rho.max(), cfg.bounds.C0 + 1e-12);
        EXPECT_LE(norm(divergence(s.u), kInf), cfg.div_tol);
        EXPECT_LE(std::abs(mean(s.p)), 1e-13);
    }
    for (const StepDiagnostics& dg : tr.diagnostics) {
        EXPECT_TRUE(std::isfinite(dg.kinetic));
        EXPECT_TRUE(std::isfinite(dg.grad_u_inf));
    }
}

TEST(Run, CflModeRespectsLimits) {
    const InitialData d = initial(InitialKind::RandomBandlimited, 32, 2.0);
    SolverConfig cfg;
    cfg.T = 0.1;
    const Trajectory tr = run(d.rho, d.u, cfg);
    const double h = d.rho.grid().spacing();
    for (std::size_t k = 1; k < tr.diagnostics.size(); ++k) {
        const double dt = tr.diagnostics[k].t - tr.diagnostics[k - 1].t;
        EXPECT_LE(tr.diagnostics[k - 1].u_inf * dt / h, 0.4 + 1e-12);
    }
    EXPECT_DOUBLE_EQ(tr.diagnostics.back().t, 0.1);
}

TEST(Run, ConstantVelocityIsExact) {
    const InitialData d = initial(InitialKind::ConstantVelocity, 64);
    const Trajectory tr = run(d.rho, d.u, fixed_step(4e-3, 1.0, 0.05, 25));
    const double m0 = tr.diagnostics.front().mass;
    for (const State& s : tr.states) EXPECT_LE(norm(s.u - d.u, kInf), 1e-10);
    for (const StepDiagnostics& dg : tr.diagnostics) EXPECT_LE(std::abs(dg.mass - m0), 1e-10 * m0);
}

TEST(Run, TaylorGreenEnergyDecay) {
    const double nu = 0.1;
    const InitialData d = initial(InitialKind::TaylorGreen, 32);
    const Trajectory tr = run(d.rho, d.u, fixed_step(2e-3, 1.0, nu, 50));
    const double e0 = tr.diagnostics.front().kinetic;
    EXPECT_NEAR(e0, 0.5 * 2 * std::numbers::pi * std::numbers::pi, 1e-12);
    for (const StepDiagnostics& dg : tr.diagnostics)
        EXPECT_NEAR(dg.kinetic / (e0 * std::exp(-4 * nu * dg.t)), 1.0, 5e-3);
}

TEST(WeakForm, ConstantVelocityResidualsShrinkWithResolution) {
    // Velocity is exact, so what is left is density interpolation error.
    auto residuals = [](int n) {
        const InitialData d = initial(InitialKind::ConstantVelocity, n);
        const Trajectory tr = run(d.rho, d.u, fixed_step(1e-3, 0.2, 0.05, 10));
        const GridSpec& g = d.rho.grid();
        TestFunction phi;
        phi.chi = [](double t) { return std::cos(t); };
        phi.chi_dot = [](double t) { return -std::sin(t); };
        phi.psi = ScalarField::from_function(g, [](double x, double y) { return std::sin(x) * std::cos(y) + 0.5; });
        phi.psi_vec =
            perp_gradient(ScalarField::from_function(g, [](double x, double y) { return std::sin(x + 2 * y); }));
        return std::array<double, 3>{residual_weak_form(tr, phi, WeakForm::Mass),
                                     residual_weak_form(tr, phi, WeakForm::Momentum),
                                     residual_weak_form(tr, phi, WeakForm::Incompressibility)};
    };
    const auto coarse = residuals(64);
    const auto fine = residuals(128);
    EXPECT_LE(fine[0], 1e-4);
    EXPECT_LE(fine[1], 1e-4);
    EXPECT_LE(fine[0], 0.5 * coarse[0]);
    EXPECT_LE(fine[1], 0.5 * coarse[1]);
    EXPECT_LE(fine[2], 1e-10);
}

TEST(WeakForm, IncompressibilityBoundedByDivTol) {
    const InitialData d = initial(InitialKind::RandomBandlimited, 32);
    const SolverConfig cfg = fixed_step(5e-3, 0.1, 0.05);
    const Trajectory tr = run(d.rho, d.u, cfg);
    TestFunction phi;
    phi.psi = ScalarField::from_function(d.rho.grid(), [](double x, double y) { return std::cos(2 * x - y); });
    const double bound = cfg.div_tol * seminorm_grad(phi.psi, 1.0) * cfg.T;
    EXPECT_LE(residual_weak_form(tr, phi, WeakForm::Incompressibility), bound);
}

TEST(WeakForm, MomentumResidualShrinksWithDt) {
    const InitialData d = initial(InitialKind::TaylorGreen, 32);
    const GridSpec& g = d.rho.grid();
    TestFunction phi;
    phi.chi = [](double t) { return 1.0 + t; };
    phi.chi_dot = [](double) { return 1.0; };
    phi.psi_vec = d.u;
    auto residual = [&](double dt) {
        const Trajectory tr = run(d.rho, d.u, fixed_step(dt, 0.2, 0.1));
        return residual_weak_form(tr, phi, WeakForm::Momentum);
    };
    const double coarse = residual(4e-3), fine = residual(2e-3);
    EXPECT_LE(fine, 0.5 * coarse + 1e-13);
    (void)g;
}

TEST(WeakForm, RejectsDivergentTestFunction) {
    const InitialData d = initial(InitialKind::TaylorGreen, 16);
    const Trajectory tr = run(d.rho, d.u, fixed_step(1e-2, 0.05, 0.1));
    TestFunction phi;
    phi.psi_vec = gradient(ScalarField::from_function(d.rho.grid(), [](double x, double) { return std::sin(x); }));
    EXPECT_EQ(code_of([&] { residual_weak_form(tr, phi, WeakForm::Momentum); }), ErrorCode::BadTestFunction);
}

TEST(EnergyReport, ZeroVelocityHasNoGap) {
    const InitialData d = initial(InitialKind::RandomBandlimited, 16);
    const Trajectory tr = run(d.rho, VectorField2(d.rho.grid()), fixed_step(1e-2, 0.1));
    const EnergyReport rep = energy_report(tr);
    for (double gap : rep.gap) EXPECT_EQ(gap, 0.0);
    EXPECT_EQ(rep.max_rel_gap, 0.0);
}

TEST(EnergyReport, TaylorGreenGapIsSmall) {
    const InitialData d = initial(InitialKind::TaylorGreen, 32);
    const Trajectory tr = run(d.rho, d.u, fixed_step(1e-3, 0.5, 0.05, 100));
    EXPECT_LE(energy_report(tr).max_rel_gap, 1e-3);
}

TEST(EnergyReport, RandomDataGapShrinksUnderRefinement) {
    auto gap = [](int n, double dt) {
        const InitialData d = initial(InitialKind::RandomBandlimited, n);
        const Trajectory tr = run(d.rho, d.u, fixed_step(dt, 0.2, 0.05, 1000));
        return energy_report(tr).max_rel_gap;
    };
    const double coarse = gap(32, 4e-3), fine = gap(64, 2e-3);
    EXPECT_LE(fine, 0.5 * coarse);
}

TEST(VacuumFreedom, HighShearBlobMix) {
    InitialParams p;
    p.amplitude = 3.0;
    p.kmax = 8;
    const InitialData d = make_initial(InitialKind::DensityBlobMix, p, 5, GridSpec::make(64), DensityBounds{});
    SolverConfig cfg;
    cfg.T = 0.3;
    cfg.snapshot_stride = 1000;
    const Trajectory tr = run(d.rho, d.u, cfg);
    for (const StepDiagnostics& dg : tr.diagnostics) {
        EXPECT_GE(dg.rho_min, cfg.bounds.c0 - 1e-12);
        EXPECT_LE(dg.rho_max, cfg.bounds.C0 + 1e-12);
    }
}
