#include <gtest/gtest.h>

#include <cmath>

#include "densiflow/error.hpp"
#include "densiflow/initial.hpp"
#include "densiflow/transport.hpp"

using namespace densiflow;

namespace {

VectorField2 taylor_green(const GridSpec& g) {
    return {ScalarField::from_function(g, [](double x, double y) { return std::sin(x) * std::cos(y); }),
            ScalarField::from_function(g, [](double x, double y) { return -std::cos(x) * std::sin(y); })};
}

/// Steady track with samples at the given times.
VelocityTrack steady(const VectorField2& v, std::vector<double> times) {
    std::vector<VectorField2> snaps(times.size(), v);
    return VelocityTrack(std::move(times), std::move(snaps));
}

std::vector<double> uniform_times(double a, double b, int intervals) {
    std::vector<double> t;
    for (int k = 0; k <= intervals; ++k) t.push_back(a + (b - a) * k / intervals);
    return t;
}

double blob_density(double x, double y, double L) { return 0.5 + 1.5 * periodic_blob(x, y, L / 2, L / 2, 0.6, L); }

double l2_error(const ScalarField& a, const std::function<double(double, double)>& exact) {
    const ScalarField e = ScalarField::from_function(a.grid(), exact);
    return norm(a - e, 2.0);
}

}  // namespace

TEST(VelocityTrack, RejectsBadTimes) {
    const GridSpec g = GridSpec::make(8);
    const VectorField2 v(g);
    EXPECT_THROW(VelocityTrack({0.0}, {v}), Error);
    EXPECT_THROW(VelocityTrack({0.0, 0.0}, {v, v}), Error);
    EXPECT_THROW(VelocityTrack({0.0, 1.0}, {v}), Error);
}

TEST(VelocityTrack, LinearInTime) {
    const GridSpec g = GridSpec::make(16);
    const VectorField2 a(g, 1.0, 0.0), b(g, 3.0, -2.0);
    const VelocityTrack tr({0.0, 1.0}, {a, b});
    double u[2], du[4];
    tr.eval(0.25, 1.0, 2.0, u, du);
    EXPECT_NEAR(u[0], 1.5, 1e-14);
    EXPECT_NEAR(u[1], -0.5, 1e-14);
    for (double d : du) EXPECT_NEAR(d, 0.0, 1e-14);
}

TEST(AdvanceFlow, ZeroVelocityIsIdentity) {
    const GridSpec g = GridSpec::make(16);
    const VelocityTrack u = steady(VectorField2(g), {0.0, 1.0});
    const FlowMap f = advance_flow(u, 0.0, 1.0, 0.1);
    for (std::size_t k = 0; k < g.size(); ++k) {
        EXPECT_EQ(f.displacement.x[k], 0.0);
        EXPECT_EQ(f.displacement.y[k], 0.0);
        EXPECT_EQ(f.differential[0][k], 1.0);
        EXPECT_EQ(f.differential[1][k], 0.0);
        EXPECT_EQ(f.differential[2][k], 0.0);
        EXPECT_EQ(f.differential[3][k], 1.0);
        EXPECT_EQ(f.jacobian[k], 1.0);
    }
}

TEST(AdvanceFlow, SameTimeIsIdentity) {
    const GridSpec g = GridSpec::make(16);
    const VelocityTrack u = steady(taylor_green(g), {0.0, 1.0});
    const FlowMap f = advance_flow(u, 0.5, 0.5, 0.1);
    EXPECT_EQ(f.jacobian_defect(), 0.0);
    EXPECT_EQ(norm(f.displacement, kInf), 0.0);
}

TEST(AdvanceFlow, ConstantVelocityTranslates) {
    const GridSpec g = GridSpec::make(16);
    const double c = 0.7;
    const VelocityTrack u = steady(VectorField2(g, c, 0.0), {0.0, 2.0});
    const FlowMap f = advance_flow(u, 0.5, 1.75, 0.01);
    for (std::size_t k = 0; k < g.size(); ++k) {
        EXPECT_NEAR(f.displacement.x[k], c * 1.25, 1e-13);
        EXPECT_NEAR(f.displacement.y[k], 0.0, 1e-14);
    }
    EXPECT_NEAR(f.dx_norm_inf(), 1.0, 1e-14);
    EXPECT_NEAR(f.jacobian_defect(), 0.0, 1e-14);
}

TEST(AdvanceFlow, OutOfRangeTimes) {
    const GridSpec g = GridSpec::make(8);
    const VelocityTrack u = steady(VectorField2(g), {0.0, 1.0});
    try {
        advance_flow(u, 0.0, 1.5, 0.1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::OutOfRange);
    }
}

TEST(AdvanceFlow, TaylorGreenRoundTripAndJacobian) {
    const GridSpec g = GridSpec::make(64);
    const VelocityTrack u = steady(taylor_green(g), uniform_times(0.0, 1.0, 4));
    const FlowMap fwd = advance_flow(u, 0.0, 1.0, 1e-3);
    EXPECT_LE(fwd.jacobian_defect(), 1e-5);
    std::vector<double> x(g.size()), y(g.size());
    const double h = g.spacing();
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) {
            const std::size_t k = static_cast<std::size_t>(i) * g.n + j;
            x[k] = i * h + fwd.displacement.x[k];
            y[k] = j * h + fwd.displacement.y[k];
        }
    const PointFlow back = trace_points(u, x, y, 1.0, 0.0, 1e-3, false);
    double worst = 0.0;
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) {
            const std::size_t k = static_cast<std::size_t>(i) * g.n + j;
            worst = std::max({worst, std::abs(back.x[k] - i * h), std::abs(back.y[k] - j * h)});
        }
    EXPECT_LE(worst, 1e-6);
}

TEST(AdvanceFlow, MultiTargetMatchesSingle) {
    const GridSpec g = GridSpec::make(16);
    const VelocityTrack u = steady(taylor_green(g), uniform_times(0.0, 1.0, 4));
    const std::vector<FlowMap> many = advance_flow_multi(u, 0.5, {0.2, 1.0, 0.7}, 1e-2);
    ASSERT_EQ(many.size(), 3u);
    const FlowMap one = advance_flow(u, 0.5, 1.0, 1e-2);
    EXPECT_DOUBLE_EQ(many[1].t, 1.0);
    EXPECT_LE(norm(many[1].displacement - one.displacement, kInf), 1e-12);
}

TEST(DxBoundCheck, TrivialAndTaylorGreen) {
    const GridSpec g = GridSpec::make(16);
    const VelocityTrack zero = steady(VectorField2(g), {0.0, 1.0});
    const CheckResult r0 = dx_bound_check(advance_flow(zero, 0.0, 1.0, 0.1), zero);
    EXPECT_EQ(r0.lhs, 1.0);
    EXPECT_EQ(r0.rhs, 1.0);
    EXPECT_TRUE(r0.pass);

    const VelocityTrack cv = steady(VectorField2(g, 2.0, 0.0), {0.0, 1.0});
    const CheckResult r1 = dx_bound_check(advance_flow(cv, 0.0, 1.0, 0.1), cv);
    EXPECT_NEAR(r1.lhs, 1.0, 1e-14);
    EXPECT_NEAR(r1.rhs, 1.0, 1e-14);
    EXPECT_TRUE(r1.pass);

    const GridSpec g2 = GridSpec::make(32);
    const VelocityTrack tg = steady(taylor_green(g2), uniform_times(0.0, 1.0, 10));
    const CheckResult r2 = dx_bound_check(advance_flow(tg, 0.1, 1.0, 1e-3), tg);
    EXPECT_TRUE(r2.pass);
    EXPECT_GT(r2.margin, 0.0);
}

TEST(LogKernelFlowCheck, EqualTimesAndZeroVelocity) {
    const GridSpec g = GridSpec::make(16);
    const VelocityTrack zero = steady(VectorField2(g), {0.0, 1.0});
    const CheckResult same = log_kernel_flow_check(advance_flow(zero, 0.5, 0.5, 0.1), 3.0);
    EXPECT_EQ(same.lhs, 1.0);
    EXPECT_EQ(same.rhs, 1.0);
    EXPECT_TRUE(same.pass);
    const CheckResult apart = log_kernel_flow_check(advance_flow(zero, 0.1, 1.0, 0.1), 3.0);
    EXPECT_TRUE(apart.pass);
    EXPECT_GT(apart.rhs, 1.0);
    try {
        log_kernel_flow_check(advance_flow(zero, 0.0, 1.0, 0.1), 1.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NonPositiveTimes);
    }
}

TEST(TransportDensity, ZeroVelocityLeavesDensity) {
    const GridSpec g = GridSpec::make(32);
    const ScalarField rho =
        ScalarField::from_function(g, [&](double x, double y) { return blob_density(x, y, g.length); });
    const VelocityTrack u = steady(VectorField2(g), {0.0, 1.0});
    for (DensityInterp kind : {DensityInterp::Bilinear, DensityInterp::ClampedSpline}) {
        const ScalarField out = transport_density(rho, u, nullptr, 0.0, 1.0, {0.1, kind});
        EXPECT_LE(norm(out - rho, kInf), 1e-14);
    }
}

TEST(TransportDensity, ConstantSourceAddsElapsedTime) {
    const GridSpec g = GridSpec::make(16);
    const ScalarField rho =
        ScalarField::from_function(g, [&](double x, double y) { return blob_density(x, y, g.length); });
    const VelocityTrack u = steady(VectorField2(g), {0.0, 1.0});
    const ScalarTrack f({0.0, 1.0}, {ScalarField(g, 1.0), ScalarField(g, 1.0)});
    const ScalarField out = transport_density(rho, u, &f, 0.2, 0.9, {0.05});
    EXPECT_LE(norm(out - rho - ScalarField(g, 0.7), kInf), 1e-13);
}

TEST(TransportDensity, TranslationErrorIsSecondOrder) {
    // The shift is 8 1/3 cells at n = 64 and 16 2/3 at n = 128, so both see the same t (1 - t).
    const double c = 25.0 / 3.0 * kTwoPi / 64.0, d = 1.0;
    auto err = [&](int n) {
        const GridSpec g = GridSpec::make(n);
        const double L = g.length;
        const ScalarField rho = ScalarField::from_function(g, [&](double x, double y) { return blob_density(x, y, L); });
        const VelocityTrack u = steady(VectorField2(g, c, 0.0), {0.0, d});
        const ScalarField out = transport_density(rho, u, nullptr, 0.0, d, {0.05, DensityInterp::Bilinear});
        return l2_error(out, [&](double x, double y) { return blob_density(x - c * d, y, L); });
    };
    const double e64 = err(64), e128 = err(128);
    EXPECT_GT(std::log2(e64 / e128), 1.8);
}

TEST(Renormalization, TranslatedBlobOracle) {
    // Exact samples of a translated blob: residuals only carry quadrature error
    // and shrink as the snapshot spacing shrinks.
    const GridSpec g = GridSpec::make(64);
    const double L = g.length, c = 0.9;
    const ScalarField phi =
        ScalarField::from_function(g, [](double x, double y) { return std::sin(x) * std::sin(y) + 0.5 * std::cos(x + 2 * y); });
    auto worst = [&](int intervals, const Beta& beta) {
        const std::vector<double> times = uniform_times(0.0, 1.0, intervals);
        std::vector<ScalarField> snaps;
        for (double t : times)
            snaps.push_back(ScalarField::from_function(g, [&](double x, double y) { return blob_density(x - c * t, y, L); }));
        const ScalarTrack rho(times, snaps);
        const VelocityTrack u = steady(VectorField2(g, c, 0.0), times);
        double w = 0.0;
        for (double t : {0.25, 0.5, 1.0}) w = std::max(w, renormalization_residual(rho, u, beta, phi, t));
        return w;
    };
    for (const Beta& beta : {Beta::identity(), Beta::square(), Beta::reciprocal()}) {
        const double coarse = worst(40, beta), fine = worst(80, beta);
        EXPECT_LE(fine, 1e-3) << beta.name;
        EXPECT_GT(coarse / fine, 3.0) << beta.name;
    }
}

TEST(Renormalization, ReciprocalRejectsNonPositiveDensity) {
    const GridSpec g = GridSpec::make(16);
    const ScalarField bad = ScalarField::from_function(g, [](double x, double) { return std::sin(x); });
    const ScalarTrack rho({0.0, 1.0}, {bad, bad});
    const VelocityTrack u = steady(VectorField2(g), {0.0, 1.0});
    try {
        renormalization_residual(rho, u, Beta::reciprocal(), ScalarField(g, 1.0), 1.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DomainError);
    }
}

TEST(SupportGrowth, ZeroVelocityKeepsRadius) {
    const GridSpec g = GridSpec::make(64);
    const double L = g.length;
    const ScalarField blob = ScalarField::from_function(g, [&](double x, double y) {
        const double r = std::hypot(x - L / 2, y - L / 2);
        return r < 0.8 ? std::pow(1 - r * r / 0.64, 4) : 0.0;
    });
    const VelocityTrack u = steady(VectorField2(g), {0.0, 1.0});
    const SupportReport rep = support_growth_check(blob, u, 0.0, 1.0);
    EXPECT_DOUBLE_EQ(rep.r_final, rep.r_initial);
    EXPECT_TRUE(rep.pass);
}

TEST(SupportGrowth, TranslationAndTaylorGreenWithinBudget) {
    const GridSpec g = GridSpec::make(64);
    const double L = g.length;
    const ScalarField blob = ScalarField::from_function(g, [&](double x, double y) {
        const double r = std::hypot(x - L / 2, y - L / 2);
        return r < 0.5 ? std::pow(1 - r * r / 0.25, 4) : 0.0;
    });
    const double c = 0.6, d = 0.5;
    const VelocityTrack cv = steady(VectorField2(g, c, 0.0), {0.0, d});
    const SupportReport r1 = support_growth_check(blob, cv, 0.0, d);
    EXPECT_TRUE(r1.pass);
    EXPECT_LE(r1.r_final, r1.r_initial + c * d + 2 * g.spacing());

    const VelocityTrack tg = steady(taylor_green(g), {0.0, 0.2});
    EXPECT_TRUE(support_growth_check(blob, tg, 0.0, 0.2).pass);

    const VelocityTrack fast = steady(VectorField2(g, 10.0, 0.0), {0.0, 1.0});
    try {
        support_growth_check(blob, fast, 0.0, 1.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::WrapAround);
    }
}
