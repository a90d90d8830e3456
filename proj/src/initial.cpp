#include "densiflow/initial.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "densiflow/error.hpp"

namespace densiflow {
namespace {

struct Mode {
    int mx;
    int my;
    double amplitude;
    double phase;
};

/// Modes 0 < |m| <= kmax of the half plane in a fixed order, with random
/// amplitudes decaying like |m|^-slope and uniform phases.
std::vector<Mode> draw_modes(std::mt19937_64& rng, int kmax, double slope) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, kTwoPi);
    std::vector<Mode> modes;
    for (int mx = -kmax; mx <= kmax; ++mx) {
        for (int my = 0; my <= kmax; ++my) {
            if (my == 0 && mx <= 0) continue;
            const double r2 = static_cast<double>(mx * mx + my * my);
            if (r2 > static_cast<double>(kmax * kmax)) continue;
            const double a = normal(rng) * std::pow(r2, -0.5 * slope);
            const double ph = uniform(rng);
            modes.push_back({mx, my, a, ph});
        }
    }
    return modes;
}

void check_density_range(const InitialParams& p, const DensityBounds& b) {
    if (!(p.rho_lo > 0.0) || !(p.rho_lo <= p.rho_hi))
        throw Error(ErrorCode::BadParams, "density range must satisfy 0 < rho_lo <= rho_hi");
    if (p.rho_lo < b.c0 || p.rho_hi > b.C0)
        throw Error(ErrorCode::BadParams, "density range lies outside the density bounds");
}

/// Random divergence-free velocity with RMS speed equal to `amplitude`.
VectorField2 random_velocity(std::mt19937_64& rng, const InitialParams& p, const GridSpec& g) {
    if (p.kmax < 1) throw Error(ErrorCode::BadParams, "kmax must be >= 1");
    if (3 * p.kmax >= g.n) throw Error(ErrorCode::BadParams, "kmax is not resolved by the dealiased grid");
    const std::vector<Mode> modes = draw_modes(rng, p.kmax, p.slope);
    const double k0 = kTwoPi / g.length;
    // psi = sum a cos(k0 m.x + phase); u = (-psi_y, psi_x); mean |u|^2 = sum a^2 k0^2 |m|^2 / 2.
    double msq = 0.0;
    for (const Mode& m : modes) msq += 0.5 * m.amplitude * m.amplitude * k0 * k0 * (m.mx * m.mx + m.my * m.my);
    if (!(msq > 0.0)) throw Error(ErrorCode::BadParams, "random velocity is degenerate");
    const double scale = p.amplitude / std::sqrt(msq);
    VectorField2 u(g);
    const double h = g.spacing();
    const long long n = g.n;
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < n; ++i) {
        for (int j = 0; j < g.n; ++j) {
            const double x = i * h;
            const double y = j * h;
            double vx = 0.0;
            double vy = 0.0;
            for (const Mode& m : modes) {
                const double s = std::sin(k0 * (m.mx * x + m.my * y) + m.phase);
                // d/dx cos(theta) = -k0 mx sin(theta)
                vx += m.amplitude * k0 * m.my * s;
                vy -= m.amplitude * k0 * m.mx * s;
            }
            u.x(static_cast<int>(i), j) = scale * vx;
            u.y(static_cast<int>(i), j) = scale * vy;
        }
    }
    return u;
}

/// Smooth random density strictly inside [rho_lo, rho_hi].
ScalarField random_density(std::mt19937_64& rng, const InitialParams& p, const GridSpec& g) {
    if (p.rho_kmax < 1) throw Error(ErrorCode::BadParams, "rho_kmax must be >= 1");
    const std::vector<Mode> modes = draw_modes(rng, p.rho_kmax, 1.0);
    double bound = 0.0;
    for (const Mode& m : modes) bound += std::abs(m.amplitude);
    const double mid = 0.5 * (p.rho_lo + p.rho_hi);
    const double half = 0.5 * (p.rho_hi - p.rho_lo);
    const double k0 = kTwoPi / g.length;
    return ScalarField::from_function(g, [&](double x, double y) {
        double v = 0.0;
        for (const Mode& m : modes) v += m.amplitude * std::cos(k0 * (m.mx * x + m.my * y) + m.phase);
        return mid + (bound > 0.0 ? half * v / bound : 0.0);
    });
}

}  // namespace

InitialKind parse_initial_kind(const std::string& name) {
    if (name == "taylor_green") return InitialKind::TaylorGreen;
    if (name == "constant_velocity") return InitialKind::ConstantVelocity;
    if (name == "random_bandlimited") return InitialKind::RandomBandlimited;
    if (name == "density_blob_mix") return InitialKind::DensityBlobMix;
    throw Error(ErrorCode::BadParams, "unknown initial kind '" + name + "'");
}

std::string to_string(InitialKind kind) {
    switch (kind) {
        case InitialKind::TaylorGreen: return "taylor_green";
        case InitialKind::ConstantVelocity: return "constant_velocity";
        case InitialKind::RandomBandlimited: return "random_bandlimited";
        case InitialKind::DensityBlobMix: return "density_blob_mix";
    }
    return "unknown";
}

double periodic_blob(double x, double y, double x0, double y0, double sigma, double length) {
    const double k = kTwoPi / length;
    const double q = 2.0 - std::cos(k * (x - x0)) - std::cos(k * (y - y0));
    return std::exp(-q / (k * k * sigma * sigma));
}

InitialData make_initial(InitialKind kind, const InitialParams& p, std::uint64_t seed, const GridSpec& g,
                         const DensityBounds& bounds) {
    bounds.validate();
    if (!std::isfinite(p.amplitude)) throw Error(ErrorCode::BadParams, "amplitude must be finite");
    std::mt19937_64 rng(seed);
    InitialData out;
    switch (kind) {
        case InitialKind::TaylorGreen: {
            if (bounds.c0 > 1.0 || bounds.C0 < 1.0)
                throw Error(ErrorCode::BadParams, "Taylor-Green uses rho = 1, which lies outside the bounds");
            const double k = kTwoPi / g.length;
            const double a = p.amplitude;
            out.u = VectorField2(ScalarField::from_function(g, [&](double x, double y) {
                                     return a * std::sin(k * x) * std::cos(k * y);
                                 }),
                                 ScalarField::from_function(g, [&](double x, double y) {
                                     return -a * std::cos(k * x) * std::sin(k * y);
                                 }));
            out.rho = ScalarField(g, 1.0);
            break;
        }
        case InitialKind::ConstantVelocity: {
            check_density_range(p, bounds);
            if (!(p.blob_width > 0.0)) throw Error(ErrorCode::BadParams, "blob_width must be positive");
            const double x0 = p.blob_x < 0.0 ? 0.5 * g.length : p.blob_x;
            const double y0 = p.blob_y < 0.0 ? 0.5 * g.length : p.blob_y;
            out.u = VectorField2(g, p.amplitude, 0.0);
            out.rho = ScalarField::from_function(g, [&](double x, double y) {
                return p.rho_lo + (p.rho_hi - p.rho_lo) * periodic_blob(x, y, x0, y0, p.blob_width, g.length);
            });
            break;
        }
        case InitialKind::RandomBandlimited: {
            check_density_range(p, bounds);
            out.u = random_velocity(rng, p, g);
            out.rho = random_density(rng, p, g);
            break;
        }
        case InitialKind::DensityBlobMix: {
            check_density_range(p, bounds);
            if (p.blob_count < 1) throw Error(ErrorCode::BadParams, "blob_count must be >= 1");
            if (!(p.blob_width > 0.0)) throw Error(ErrorCode::BadParams, "blob_width must be positive");
            out.u = random_velocity(rng, p, g);
            std::uniform_real_distribution<double> pos(0.0, g.length);
            std::uniform_real_distribution<double> height(0.5, 1.0);
            struct Blob {
                double x, y, a;
            };
            std::vector<Blob> blobs;
            for (int b = 0; b < p.blob_count; ++b) {
                const double bx = pos(rng);
                const double by = pos(rng);
                blobs.push_back({bx, by, height(rng)});
            }
            // 1 - prod(1 - a_i b_i) stays in [0, 1].
            out.rho = ScalarField::from_function(g, [&](double x, double y) {
                double keep = 1.0;
                for (const Blob& b : blobs) keep *= 1.0 - b.a * periodic_blob(x, y, b.x, b.y, p.blob_width, g.length);
                return p.rho_lo + (p.rho_hi - p.rho_lo) * (1.0 - keep);
            });
            break;
        }
    }
    return out;
}

}  // namespace densiflow
