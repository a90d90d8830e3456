#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "densiflow/error.hpp"
#include "densiflow/fft.hpp"
#include "densiflow/fields.hpp"

using namespace densiflow;

namespace {

constexpr double kPi = std::numbers::pi;

double sup_diff(const ScalarField& a, const ScalarField& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

double sup_abs(const ScalarField& a) {
    double m = 0.0;
    for (double v : a.values()) m = std::max(m, std::abs(v));
    return m;
}

/// Random band-limited field with modes |m| <= kmax.
ScalarField random_field(const GridSpec& g, int kmax, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    ScalarField f(g);
    for (int a = -kmax; a <= kmax; ++a) {
        for (int b = 0; b <= kmax; ++b) {
            const double c = nd(rng), s = nd(rng);
            for (int i = 0; i < g.n; ++i)
                for (int j = 0; j < g.n; ++j) {
                    const double ph = (a * i + b * j) * kTwoPi / g.n;
                    f(i, j) += c * std::cos(ph) + s * std::sin(ph);
                }
        }
    }
    return f;
}

VectorField2 random_vector(const GridSpec& g, int kmax, std::uint64_t seed) {
    return {random_field(g, kmax, seed), random_field(g, kmax, seed + 7)};
}

}  // namespace

TEST(GridSpec, RejectsNonPowerOfTwo) {
    EXPECT_THROW(GridSpec::make(12), Error);
    EXPECT_THROW(GridSpec::make(4), Error);
    EXPECT_NO_THROW(GridSpec::make(8));
    try {
        GridSpec::make(100);
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::BadGrid);
    }
}

TEST(GridSpec, SpacingTimesCountIsLength) {
    for (int n : {8, 16, 64, 128, 256}) {
        const GridSpec g = GridSpec::make(n);
        EXPECT_EQ(g.spacing() * n, g.length);
    }
}

TEST(ScalarField, RejectsNonFiniteAndWrongSize) {
    const GridSpec g = GridSpec::make(8);
    std::vector<double> v(g.size(), 1.0);
    v[3] = std::nan("");
    try {
        ScalarField f(g, v);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NonFinite);
    }
    try {
        ScalarField f(g, std::vector<double>(10, 0.0));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::GridMismatch);
    }
}

TEST(ScalarField, MixedGridsThrow) {
    const ScalarField a(GridSpec::make(8), 1.0);
    ScalarField b(GridSpec::make(16), 1.0);
    EXPECT_THROW(b += a, Error);
}

TEST(Gradient, SingleMode) {
    const GridSpec g = GridSpec::make(32);
    const ScalarField f = ScalarField::from_function(g, [](double x, double) { return std::sin(x); });
    const VectorField2 d = gradient(f);
    const ScalarField cx = ScalarField::from_function(g, [](double x, double) { return std::cos(x); });
    EXPECT_LE(sup_diff(d.x, cx), 1e-12);
    EXPECT_LE(sup_abs(d.y), 1e-12);
}

TEST(Gradient, ConstantIsExactlyZero) {
    const ScalarField f(GridSpec::make(16), 7.0);
    const VectorField2 d = gradient(f);
    for (double v : d.x.values()) EXPECT_EQ(v, 0.0);
    for (double v : d.y.values()) EXPECT_EQ(v, 0.0);
}

TEST(Gradient, ProductModeMatchesSymbolicDerivative) {
    const GridSpec g = GridSpec::make(64);
    const ScalarField f =
        ScalarField::from_function(g, [](double x, double y) { return std::sin(2 * x) * std::cos(3 * y); });
    const VectorField2 d = gradient(f);
    const ScalarField ex =
        ScalarField::from_function(g, [](double x, double y) { return 2 * std::cos(2 * x) * std::cos(3 * y); });
    const ScalarField ey =
        ScalarField::from_function(g, [](double x, double y) { return -3 * std::sin(2 * x) * std::sin(3 * y); });
    EXPECT_LE(sup_diff(d.x, ex), 1e-12);
    EXPECT_LE(sup_diff(d.y, ey), 1e-12);
}

TEST(Gradient, NyquistModeOfOddDerivativeIsDropped) {
    const GridSpec g = GridSpec::make(16);
    const ScalarField f = ScalarField::from_function(g, [](double x, double) { return std::cos(8 * x); });
    EXPECT_LE(sup_abs(partial_x(f)), 1e-12);
    // Second derivatives keep it.
    EXPECT_NEAR(laplacian(f)(0, 0), -64.0, 1e-9);
}

TEST(Divergence, OfGradientIsLaplacian) {
    const GridSpec g = GridSpec::make(32);
    const ScalarField f = ScalarField::from_function(g, [](double x, double y) { return std::sin(x) * std::sin(y); });
    const ScalarField expected = -2.0 * f;
    EXPECT_LE(sup_diff(divergence(gradient(f)), expected), 1e-12);
    EXPECT_LE(sup_diff(laplacian(f), expected), 1e-12);

    const ScalarField r = random_field(g, 9, 3);
    const ScalarField a = divergence(gradient(r));
    const ScalarField b = laplacian(r);
    EXPECT_LE(sup_diff(a, b), 1e-11 * sup_abs(b));
}

TEST(Divergence, StreamFunctionFieldIsSolenoidal) {
    const GridSpec g = GridSpec::make(32);
    const ScalarField psi = ScalarField::from_function(g, [](double x, double y) { return std::sin(x) * std::cos(y); });
    EXPECT_LE(sup_abs(divergence(perp_gradient(psi))), 1e-12);
}

TEST(HessianNorms, MatchesAnalyticEntries) {
    // u = (sin x, 0): the only nonzero second derivative is d_xx u_x = -sin x.
    const GridSpec g = GridSpec::make(32);
    const VectorField2 u(ScalarField::from_function(g, [](double x, double) { return std::sin(x); }), ScalarField(g));
    const ScalarField h = hessian_norms(u);
    const ScalarField expected = ScalarField::from_function(g, [](double x, double) { return std::abs(std::sin(x)); });
    EXPECT_LE(sup_diff(h, expected), 1e-12);
}

TEST(LerayProject, RemovesGradients) {
    const GridSpec g = GridSpec::make(32);
    const ScalarField f = ScalarField::from_function(g, [](double x, double y) { return std::sin(x) * std::sin(y); });
    const VectorField2 p = leray_project(gradient(f));
    EXPECT_LE(sup_abs(p.x), 1e-12);
    EXPECT_LE(sup_abs(p.y), 1e-12);
}

TEST(LerayProject, KeepsSolenoidalFields) {
    const GridSpec g = GridSpec::make(32);
    const VectorField2 v = perp_gradient(random_field(g, 6, 11));
    const VectorField2 p = leray_project(v);
    EXPECT_LE(sup_diff(p.x, v.x), 1e-12 * std::max(1.0, sup_abs(v.x)));
    EXPECT_LE(sup_diff(p.y, v.y), 1e-12 * std::max(1.0, sup_abs(v.y)));
}

TEST(LerayProject, RandomFieldSplitsIntoDivFreeAndCurlFree) {
    const GridSpec g = GridSpec::make(64);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const VectorField2 v = random_vector(g, 10, seed);
        const VectorField2 p = leray_project(v);
        const double scale = std::max(sup_abs(v.x), sup_abs(v.y)) * 10.0;
        EXPECT_LE(sup_abs(divergence(p)), 1e-11 * scale);
        EXPECT_LE(sup_abs(curl(v - p)), 1e-11 * scale);
        const VectorField2 pp = leray_project(p);
        EXPECT_LE(sup_diff(pp.x, p.x), 1e-12 * scale);
        EXPECT_LE(sup_diff(pp.y, p.y), 1e-12 * scale);
    }
}

TEST(Norms, ConstantAndSine) {
    const GridSpec g = GridSpec::make(64);
    EXPECT_NEAR(norm(ScalarField(g, 1.0), 2.0), 2 * kPi, 1e-12);
    const ScalarField s = ScalarField::from_function(g, [](double x, double) { return std::sin(x); });
    EXPECT_NEAR(norm(s, 2.0), kPi * std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(spectral_l2_norm(s), kPi * std::sqrt(2.0), 1e-12);
    // The grid contains x = pi/2, so the sample maximum is exact here.
    EXPECT_NEAR(norm(s, kInf), 1.0, 1e-15);
    const GridSpec g2 = GridSpec::make(32, 7.0);
    const ScalarField s2 = ScalarField::from_function(g2, [](double x, double) { return std::sin(x); });
    EXPECT_LE(norm(s2, kInf), 1.0);
    EXPECT_GE(norm(s2, kInf), std::cos(g2.spacing()));
}

TEST(Norms, ParsevalAgreesWithQuadrature) {
    const GridSpec g = GridSpec::make(32);
    const ScalarField f = random_field(g, 8, 5);
    EXPECT_NEAR(spectral_l2_norm(f), norm(f, 2.0), 1e-11 * norm(f, 2.0));
}

TEST(Norms, RejectsExponentBelowOne) {
    const ScalarField f(GridSpec::make(8), 1.0);
    EXPECT_THROW(norm(f, 0.5), Error);
}

TEST(Mollifier, SymbolProperties) {
    for (int n : {1, 2, 4, 8, 16}) {
        const MollifierLevel m{n};
        EXPECT_EQ(m.symbol(0.0, 0.0), 1.0);
        for (double k : {1.0, 3.0, 10.0}) {
            EXPECT_GT(m.symbol(k, 0.5 * k), 0.0);
            EXPECT_LE(m.symbol(k, 0.5 * k), 1.0);
        }
    }
}

TEST(Mollifier, ConstantUnchangedAndSingleModeDamped) {
    const GridSpec g = GridSpec::make(32);
    const ScalarField c(g, 3.5);
    EXPECT_LE(sup_diff(mollify(c, {1}), c), 1e-14);
    const ScalarField s = ScalarField::from_function(g, [](double x, double) { return std::sin(x); });
    EXPECT_LE(sup_diff(mollify(s, {1}), std::exp(-0.5) * s), 1e-14);
}

TEST(Mollifier, ErrorDecreasesMonotonically) {
    const GridSpec g = GridSpec::make(64);
    const ScalarField f = random_field(g, 12, 2);
    double prev = kInf;
    for (int n : {1, 2, 4, 8, 16}) {
        const double e = norm(mollify(f, {n}) - f, 2.0);
        EXPECT_LT(e, prev);
        prev = e;
    }
}

TEST(Dealias, KeepsLowModesDropsHighModes) {
    const GridSpec g = GridSpec::make(32);
    const ScalarField low = ScalarField::from_function(g, [](double x, double y) { return std::cos(5 * x + 10 * y); });
    EXPECT_LE(sup_diff(dealias(low), low), 1e-13);
    const ScalarField high = ScalarField::from_function(g, [](double x, double) { return std::cos(11 * x); });
    EXPECT_LE(sup_abs(dealias(high)), 1e-13);
}

TEST(Fft, RoundTripAndMeanCoefficient) {
    const GridSpec g = GridSpec::make(16);
    const ScalarField f = random_field(g, 5, 9) + ScalarField(g, 2.0);
    const Spectrum s = forward(f);
    EXPECT_NEAR(s(0, 0).real(), mean(f), 1e-13);
    EXPECT_LE(sup_diff(inverse(s), f), 1e-12);
}

TEST(Integrals, InnerAndWeightedEnergy) {
    const GridSpec g = GridSpec::make(32);
    const ScalarField s = ScalarField::from_function(g, [](double x, double) { return std::sin(x); });
    const ScalarField c = ScalarField::from_function(g, [](double x, double) { return std::cos(x); });
    EXPECT_NEAR(inner(s, c), 0.0, 1e-12);
    EXPECT_NEAR(inner(s, s), 2 * kPi * kPi, 1e-11);
    const VectorField2 v(s, c);
    EXPECT_NEAR(weighted_energy(ScalarField(g, 2.0), v), 2.0 * 4 * kPi * kPi, 1e-10);
    EXPECT_NEAR(integral(ScalarField(g, 1.0)), 4 * kPi * kPi, 1e-12);
}
