#include "densiflow/fields.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "densiflow/error.hpp"
#include "densiflow/fft.hpp"

namespace densiflow {

ScalarField::ScalarField(const GridSpec& grid, double fill) : grid_(grid), values_(grid.size(), fill) {}

ScalarField::ScalarField(const GridSpec& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
        throw Error(ErrorCode::GridMismatch, "expected " + std::to_string(grid_.size()) + " samples, got " +
                                                 std::to_string(values_.size()));
    }
    if (!all_finite()) throw Error(ErrorCode::NonFinite, "field contains non-finite samples");
}

ScalarField ScalarField::from_function(const GridSpec& grid, const std::function<double(double, double)>& f) {
    ScalarField out(grid);
    const double h = grid.spacing();
    for (int i = 0; i < grid.n; ++i)
        for (int j = 0; j < grid.n; ++j) out(i, j) = f(i * h, j * h);
    return out;
}

void require_same_grid(const GridSpec& a, const GridSpec& b) {
    if (a != b) throw Error(ErrorCode::GridMismatch, "fields live on different grids");
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
    require_same_grid(grid_, o.grid_);
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
    return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
    require_same_grid(grid_, o.grid_);
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= o.values_[k];
    return *this;
}

ScalarField& ScalarField::operator*=(double s) noexcept {
    for (double& v : values_) v *= s;
    return *this;
}

ScalarField& ScalarField::axpy(double s, const ScalarField& o) {
    require_same_grid(grid_, o.grid_);
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += s * o.values_[k];
    return *this;
}

double ScalarField::min() const noexcept { return *std::min_element(values_.begin(), values_.end()); }
double ScalarField::max() const noexcept { return *std::max_element(values_.begin(), values_.end()); }

bool ScalarField::all_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }

ScalarField pointwise(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a.grid(), b.grid());
    ScalarField out(a.grid());
    for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] * b[k];
    return out;
}

ScalarField map(const ScalarField& a, const std::function<double(double)>& f) {
    ScalarField out(a.grid());
    for (std::size_t k = 0; k < a.size(); ++k) out[k] = f(a[k]);
    return out;
}

VectorField2::VectorField2(ScalarField xc, ScalarField yc) : x(std::move(xc)), y(std::move(yc)) {
    require_same_grid(x.grid(), y.grid());
}

VectorField2::VectorField2(const GridSpec& grid, double fx, double fy) : x(grid, fx), y(grid, fy) {}

VectorField2& VectorField2::operator+=(const VectorField2& o) {
    x += o.x;
    y += o.y;
    return *this;
}

VectorField2& VectorField2::operator-=(const VectorField2& o) {
    x -= o.x;
    y -= o.y;
    return *this;
}

VectorField2& VectorField2::operator*=(double s) noexcept {
    x *= s;
    y *= s;
    return *this;
}

VectorField2& VectorField2::axpy(double s, const VectorField2& o) {
    x.axpy(s, o.x);
    y.axpy(s, o.y);
    return *this;
}

VectorField2 operator+(VectorField2 a, const VectorField2& b) { return a += b; }
VectorField2 operator-(VectorField2 a, const VectorField2& b) { return a -= b; }
VectorField2 operator*(double s, VectorField2 a) { return a *= s; }

double MollifierLevel::symbol(double kx, double ky) const noexcept {
    const double nn = static_cast<double>(n);
    return std::exp(-(kx * kx + ky * ky) / (2.0 * nn * nn));
}

ScalarField partial_x(const ScalarField& f) { return inverse(derivative_x(forward(f))); }
ScalarField partial_y(const ScalarField& f) { return inverse(derivative_y(forward(f))); }

VectorField2 gradient(const ScalarField& f) {
    const Spectrum s = forward(f);
    return {inverse(derivative_x(s)), inverse(derivative_y(s))};
}

ScalarField divergence(const VectorField2& v) {
    Spectrum a = derivative_x(forward(v.x));
    const Spectrum b = derivative_y(forward(v.y));
    for (std::size_t k = 0; k < a.coeffs.size(); ++k) a.coeffs[k] += b.coeffs[k];
    return inverse(a);
}

ScalarField curl(const VectorField2& v) {
    Spectrum a = derivative_x(forward(v.y));
    const Spectrum b = derivative_y(forward(v.x));
    for (std::size_t k = 0; k < a.coeffs.size(); ++k) a.coeffs[k] -= b.coeffs[k];
    return inverse(a);
}

ScalarField laplacian(const ScalarField& f) {
    Spectrum s = forward(f);
    const GridSpec& g = s.grid;
    for (int i = 0; i < g.n; ++i) {
        const double kx = g.kx(i);
        for (int j = 0; j < g.half(); ++j) {
            const double ky = g.ky(j);
            s(i, j) *= -(kx * kx + ky * ky);
        }
    }
    return inverse(s);
}

VectorField2 laplacian(const VectorField2& v) { return {laplacian(v.x), laplacian(v.y)}; }

ScalarField hessian_norms(const VectorField2& v) {
    const GridSpec& g = v.grid();
    ScalarField out(g);
    for (const ScalarField* c : {&v.x, &v.y}) {
        const Spectrum s = forward(*c);
        const Spectrum sx = derivative_x(s);
        const Spectrum sy = derivative_y(s);
        const ScalarField dxx = inverse(derivative_x(sx));
        const ScalarField dxy = inverse(derivative_y(sx));
        const ScalarField dyy = inverse(derivative_y(sy));
        // The mixed entry appears twice in the Hessian.
        for (std::size_t k = 0; k < out.size(); ++k)
            out[k] += dxx[k] * dxx[k] + 2.0 * dxy[k] * dxy[k] + dyy[k] * dyy[k];
    }
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::sqrt(out[k]);
    return out;
}

ScalarField gradient_norms(const VectorField2& v) {
    const VectorField2 gx = gradient(v.x);
    const VectorField2 gy = gradient(v.y);
    ScalarField out(v.grid());
    for (std::size_t k = 0; k < out.size(); ++k)
        out[k] = std::sqrt(gx.x[k] * gx.x[k] + gx.y[k] * gx.y[k] + gy.x[k] * gy.x[k] + gy.y[k] * gy.y[k]);
    return out;
}

VectorField2 leray_project(const VectorField2& v) {
    Spectrum a = forward(v.x);
    Spectrum b = forward(v.y);
    const GridSpec& g = a.grid;
    for (int i = 0; i < g.n; ++i) {
        // Use the same Nyquist convention as the derivative operators so that
        // divergence() of the result vanishes.
        const double kx = (i == g.n / 2) ? 0.0 : g.kx(i);
        for (int j = 0; j < g.half(); ++j) {
            const double ky = (j == g.n / 2) ? 0.0 : g.ky(j);
            const double k2 = kx * kx + ky * ky;
            if (k2 == 0.0) continue;
            const Complex dot = kx * a(i, j) + ky * b(i, j);
            a(i, j) -= kx * dot / k2;
            b(i, j) -= ky * dot / k2;
        }
    }
    return {inverse(a), inverse(b)};
}

ScalarField mollify(const ScalarField& f, const MollifierLevel& level) {
    Spectrum s = forward(f);
    const GridSpec& g = s.grid;
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.half(); ++j) s(i, j) *= level.symbol(g.kx(i), g.ky(j));
    return inverse(s);
}

VectorField2 mollify(const VectorField2& v, const MollifierLevel& level) {
    return {mollify(v.x, level), mollify(v.y, level)};
}

ScalarField dealias(const ScalarField& f) {
    Spectrum s = forward(f);
    truncate(s);
    return inverse(s);
}

VectorField2 dealias(const VectorField2& v) { return {dealias(v.x), dealias(v.y)}; }

ScalarField dealiased_product(const ScalarField& a, const ScalarField& b) { return dealias(pointwise(a, b)); }

VectorField2 perp_gradient(const ScalarField& psi) {
    const Spectrum s = forward(psi);
    ScalarField vx = inverse(derivative_y(s));
    vx *= -1.0;
    return {std::move(vx), inverse(derivative_x(s))};
}

double integral(const ScalarField& f) {
    double acc = 0.0;
    for (double v : f.values()) acc += v;
    const double h = f.grid().spacing();
    return acc * h * h;
}

double mean(const ScalarField& f) {
    double acc = 0.0;
    for (double v : f.values()) acc += v;
    return acc / static_cast<double>(f.size());
}

double inner(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a.grid(), b.grid());
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
    const double h = a.grid().spacing();
    return acc * h * h;
}

double inner(const VectorField2& a, const VectorField2& b) { return inner(a.x, b.x) + inner(a.y, b.y); }

namespace {

double lp_of_magnitudes(const GridSpec& g, const std::vector<double>& mag, double p) {
    if (std::isinf(p)) {
        double m = 0.0;
        for (double v : mag) m = std::max(m, v);
        return m;
    }
    if (!(p >= 1.0)) throw Error(ErrorCode::BadExponent, "norm exponent must be >= 1");
    const double h = g.spacing();
    double acc = 0.0;
    if (p == 2.0) {
        for (double v : mag) acc += v * v;
        return std::sqrt(acc * h * h);
    }
    if (p == 1.0) {
        for (double v : mag) acc += v;
        return acc * h * h;
    }
    if (p == 4.0) {
        for (double v : mag) acc += (v * v) * (v * v);
        return std::sqrt(std::sqrt(acc * h * h));
    }
    for (double v : mag) acc += std::pow(v, p);
    return std::pow(acc * h * h, 1.0 / p);
}

std::vector<double> magnitudes(const ScalarField& f) {
    std::vector<double> m(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) m[k] = std::abs(f[k]);
    return m;
}

std::vector<double> magnitudes(const VectorField2& v) {
    std::vector<double> m(v.x.size());
    for (std::size_t k = 0; k < m.size(); ++k) m[k] = std::hypot(v.x[k], v.y[k]);
    return m;
}

}  // namespace

double norm(const ScalarField& f, double p) { return lp_of_magnitudes(f.grid(), magnitudes(f), p); }

double norm(const VectorField2& v, double p) { return lp_of_magnitudes(v.grid(), magnitudes(v), p); }

double seminorm_grad(const ScalarField& f, double p) { return norm(gradient(f), p); }

double seminorm_grad(const VectorField2& v, double p) {
    const ScalarField g = gradient_norms(v);
    return lp_of_magnitudes(v.grid(), magnitudes(g), p);
}

double spectral_l2_norm(const ScalarField& f) {
    const Spectrum s = forward(f);
    const double l = f.grid().length;
    return l * std::sqrt(spectral_dot(s, s));
}

double weighted_energy(const ScalarField& rho, const VectorField2& v) {
    require_same_grid(rho.grid(), v.grid());
    double acc = 0.0;
    for (std::size_t k = 0; k < rho.size(); ++k) acc += rho[k] * (v.x[k] * v.x[k] + v.y[k] * v.y[k]);
    const double h = rho.grid().spacing();
    return acc * h * h;
}

}  // namespace densiflow
