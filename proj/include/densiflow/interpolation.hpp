#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "densiflow/fields.hpp"

namespace densiflow {

/// Cell location and cubic B-spline weights of a periodic point.
struct SplineStencil {
    std::array<int, 4> ix;
    std::array<int, 4> iy;
    std::array<double, 4> wx;
    std::array<double, 4> wy;
    /// Fractional position inside the cell, for bilinear use.
    double tx;
    double ty;
};

SplineStencil make_stencil(const GridSpec& g, double x, double y) noexcept;

/// Periodic cubic B-spline interpolant of one or more fields on one grid.
/// Coefficients come from an exact spectral prefilter, so the interpolant
/// reproduces the samples at grid points.
class SplineSet {
public:
    SplineSet() = default;
    explicit SplineSet(const std::vector<const ScalarField*>& fields);

    [[nodiscard]] const GridSpec& grid() const noexcept { return grid_; }
    [[nodiscard]] std::size_t count() const noexcept { return coeffs_.size(); }

    /// Evaluates the first `members` members (all by default) at one stencil.
    void eval(const SplineStencil& st, double* out, std::size_t members = SIZE_MAX) const noexcept;
    [[nodiscard]] double eval(std::size_t member, double x, double y) const noexcept;
    [[nodiscard]] double eval_member(const SplineStencil& st, std::size_t member) const noexcept;

private:
    GridSpec grid_{};
    std::vector<std::vector<double>> coeffs_;
};

/// Spline coefficients c such that sum_k c_k B(x - x_k) interpolates f.
std::vector<double> spline_coefficients(const ScalarField& f);

/// Bilinear interpolation of periodic samples; stays within the 2x2 node range.
double interpolate_bilinear(const ScalarField& f, double x, double y) noexcept;

/// Bilinear is locally monotone. ClampedSpline is the cubic spline clipped to
/// [min f, max f]; clipping to the local cell range instead flattens smooth
/// extrema every step and costs an order of accuracy.
enum class DensityInterp { Bilinear, ClampedSpline };

/// Samples f at arbitrary points with a monotone scheme; output values lie in
/// [min f, max f].
std::vector<double> sample_monotone(const ScalarField& f, const std::vector<double>& px,
                                   const std::vector<double>& py, DensityInterp kind);

}  // namespace densiflow
