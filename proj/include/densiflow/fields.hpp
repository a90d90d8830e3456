#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "densiflow/grid.hpp"

namespace densiflow {

/// Real samples on a periodic grid, row-major: index i*n + j is the point (i*h, j*h).
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(const GridSpec& grid, double fill = 0.0);
    /// Takes ownership of samples; throws GridMismatch on a size mismatch and
    /// NonFinite on NaN/Inf entries.
    ScalarField(const GridSpec& grid, std::vector<double> values);

    /// Samples f(x, y) at every grid point.
    static ScalarField from_function(const GridSpec& grid, const std::function<double(double, double)>& f);

    [[nodiscard]] const GridSpec& grid() const noexcept { return grid_; }
    [[nodiscard]] int n() const noexcept { return grid_.n; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }

    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] std::span<double> values() noexcept { return values_; }
    [[nodiscard]] const double* data() const noexcept { return values_.data(); }
    [[nodiscard]] double* data() noexcept { return values_.data(); }

    double& operator[](std::size_t k) noexcept { return values_[k]; }
    double operator[](std::size_t k) const noexcept { return values_[k]; }
    double& operator()(int i, int j) noexcept { return values_[static_cast<std::size_t>(i) * grid_.n + j]; }
    double operator()(int i, int j) const noexcept {
        return values_[static_cast<std::size_t>(i) * grid_.n + j];
    }

    ScalarField& operator+=(const ScalarField& o);
    ScalarField& operator-=(const ScalarField& o);
    ScalarField& operator*=(double s) noexcept;
    /// this += s * o
    ScalarField& axpy(double s, const ScalarField& o);

    [[nodiscard]] double min() const noexcept;
    [[nodiscard]] double max() const noexcept;
    [[nodiscard]] bool all_finite() const noexcept;

private:
    GridSpec grid_{};
    std::vector<double> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);
/// Pointwise product (no dealiasing).
ScalarField pointwise(const ScalarField& a, const ScalarField& b);
/// Pointwise map.
ScalarField map(const ScalarField& a, const std::function<double(double)>& f);

/// Two scalar components on a shared grid.
struct VectorField2 {
    ScalarField x;
    ScalarField y;

    VectorField2() = default;
    VectorField2(ScalarField xc, ScalarField yc);
    explicit VectorField2(const GridSpec& grid, double fx = 0.0, double fy = 0.0);

    [[nodiscard]] const GridSpec& grid() const noexcept { return x.grid(); }

    VectorField2& operator+=(const VectorField2& o);
    VectorField2& operator-=(const VectorField2& o);
    VectorField2& operator*=(double s) noexcept;
    VectorField2& axpy(double s, const VectorField2& o);
};

VectorField2 operator+(VectorField2 a, const VectorField2& b);
VectorField2 operator-(VectorField2 a, const VectorField2& b);
VectorField2 operator*(double s, VectorField2 a);

/// Gaussian spectral mollifier exp(-|k|^2 / (2 n^2)).
struct MollifierLevel {
    int n = 1;
    [[nodiscard]] double symbol(double kx, double ky) const noexcept;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

void require_same_grid(const GridSpec& a, const GridSpec& b);

// Spectral calculus. Odd derivatives drop the Nyquist mode.

ScalarField partial_x(const ScalarField& f);
ScalarField partial_y(const ScalarField& f);
VectorField2 gradient(const ScalarField& f);
ScalarField divergence(const VectorField2& v);
/// Scalar vorticity dv_y/dx - dv_x/dy.
ScalarField curl(const VectorField2& v);
ScalarField laplacian(const ScalarField& f);
VectorField2 laplacian(const VectorField2& v);
/// Pointwise Frobenius norm of the rank-3 tensor of second derivatives of v.
ScalarField hessian_norms(const VectorField2& v);
/// Pointwise Frobenius norm of the 2x2 velocity gradient.
ScalarField gradient_norms(const VectorField2& v);
/// Orthogonal projection onto divergence-free fields (mean kept).
VectorField2 leray_project(const VectorField2& v);
ScalarField mollify(const ScalarField& f, const MollifierLevel& level);
VectorField2 mollify(const VectorField2& v, const MollifierLevel& level);
/// 2/3-rule truncation: keeps mode m iff 3|m_x| < n and 3|m_y| < n.
ScalarField dealias(const ScalarField& f);
VectorField2 dealias(const VectorField2& v);
/// Dealiased product of two fields.
ScalarField dealiased_product(const ScalarField& a, const ScalarField& b);
/// Velocity from a stream function: (-d psi/dy, d psi/dx).
VectorField2 perp_gradient(const ScalarField& psi);

// Quadrature. p = kInf gives the sample maximum.

double integral(const ScalarField& f);
double mean(const ScalarField& f);
double inner(const ScalarField& a, const ScalarField& b);
double inner(const VectorField2& a, const VectorField2& b);
double norm(const ScalarField& f, double p);
/// Lp norm of the pointwise Euclidean magnitude.
double norm(const VectorField2& v, double p);
/// Lp norm of |grad f|.
double seminorm_grad(const ScalarField& f, double p);
/// Lp norm of the pointwise Frobenius norm of grad v.
double seminorm_grad(const VectorField2& v, double p);
/// L2 norm from Fourier coefficients (Parseval).
double spectral_l2_norm(const ScalarField& f);
/// Weighted energy integral of rho |v|^2.
double weighted_energy(const ScalarField& rho, const VectorField2& v);

}  // namespace densiflow
