#pragma once

#include <cstdint>
#include <string>

#include "densiflow/fields.hpp"
#include "densiflow/solver.hpp"

namespace densiflow {

enum class InitialKind { TaylorGreen, ConstantVelocity, RandomBandlimited, DensityBlobMix };

InitialKind parse_initial_kind(const std::string& name);
std::string to_string(InitialKind kind);

struct InitialParams {
    /// Velocity scale: Taylor-Green amplitude, constant speed, or RMS speed of random fields.
    double amplitude = 1.0;
    /// Largest wavenumber magnitude of random velocity modes.
    int kmax = 8;
    /// Spectral decay exponent of random stream-function amplitudes.
    double slope = 3.0;
    /// Density range of generated densities (must lie inside the bounds).
    double rho_lo = 0.6;
    double rho_hi = 1.8;
    /// Largest wavenumber magnitude of random density modes.
    int rho_kmax = 4;
    /// Blob width and center for constant_velocity (center defaults to the box center).
    double blob_width = 0.6;
    double blob_x = -1.0;
    double blob_y = -1.0;
    /// Number of blobs for density_blob_mix.
    int blob_count = 4;
};

struct InitialData {
    ScalarField rho;
    VectorField2 u;
};

/// Builds divergence-free velocity and bounded density; deterministic in seed
/// and independent of the grid size (fields are sampled from closed forms).
InitialData make_initial(InitialKind kind, const InitialParams& params, std::uint64_t seed, const GridSpec& grid,
                         const DensityBounds& bounds);

/// Periodic Gaussian-like bump exp(-(2 - cos k(x-x0) - cos k(y-y0)) / (k sigma)^2), k = 2 pi / L.
double periodic_blob(double x, double y, double x0, double y0, double sigma, double length);

}  // namespace densiflow
