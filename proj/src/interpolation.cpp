#include "densiflow/interpolation.hpp"

#include <algorithm>
#include <cmath>

#include "densiflow/fft.hpp"

namespace densiflow {
namespace {

inline int wrap(int i, int n) noexcept {
    i %= n;
    return i < 0 ? i + n : i;
}

/// Locates x on a periodic axis: cell index in [0, n) and offset in [0, 1).
inline void locate(double x, double h, int n, int& cell, double& t) noexcept {
    const double u = x / h;
    double f = std::floor(u);
    t = u - f;
    if (t >= 1.0) {  // u is just below an integer and the offset rounded up
        t = 0.0;
        f += 1.0;
    }
    const long long c = static_cast<long long>(f) % n;
    cell = static_cast<int>(c < 0 ? c + n : c);
}

inline void bspline_weights(double t, std::array<double, 4>& w) noexcept {
    const double s = 1.0 - t;
    const double t2 = t * t;
    const double t3 = t2 * t;
    w[0] = s * s * s / 6.0;
    w[1] = (3.0 * t3 - 6.0 * t2 + 4.0) / 6.0;
    w[2] = (-3.0 * t3 + 3.0 * t2 + 3.0 * t + 1.0) / 6.0;
    w[3] = t3 / 6.0;
}

}  // namespace

SplineStencil make_stencil(const GridSpec& g, double x, double y) noexcept {
    SplineStencil st{};
    const double h = g.spacing();
    int cx = 0;
    int cy = 0;
    locate(x, h, g.n, cx, st.tx);
    locate(y, h, g.n, cy, st.ty);
    for (int a = 0; a < 4; ++a) {
        st.ix[a] = wrap(cx - 1 + a, g.n);
        st.iy[a] = wrap(cy - 1 + a, g.n);
    }
    bspline_weights(st.tx, st.wx);
    bspline_weights(st.ty, st.wy);
    return st;
}

std::vector<double> spline_coefficients(const ScalarField& f) {
    Spectrum s = forward(f);
    const GridSpec& g = s.grid;
    const double h = g.spacing();
    for (int i = 0; i < g.n; ++i) {
        const double bx = (2.0 + std::cos(g.kx(i) * h)) / 3.0;
        for (int j = 0; j < g.half(); ++j) {
            const double by = (2.0 + std::cos(g.ky(j) * h)) / 3.0;
            s(i, j) /= bx * by;
        }
    }
    const ScalarField c = inverse(s);
    return {c.values().begin(), c.values().end()};
}

SplineSet::SplineSet(const std::vector<const ScalarField*>& fields) {
    if (fields.empty()) return;
    grid_ = fields.front()->grid();
    coeffs_.reserve(fields.size());
    for (const ScalarField* f : fields) {
        require_same_grid(grid_, f->grid());
        coeffs_.push_back(spline_coefficients(*f));
    }
}

void SplineSet::eval(const SplineStencil& st, double* out, std::size_t members) const noexcept {
    const std::size_t m = std::min(members, coeffs_.size());
    for (std::size_t c = 0; c < m; ++c) out[c] = 0.0;
    const int n = grid_.n;
    for (int a = 0; a < 4; ++a) {
        const std::size_t row = static_cast<std::size_t>(st.ix[a]) * n;
        for (int b = 0; b < 4; ++b) {
            const double w = st.wx[a] * st.wy[b];
            const std::size_t k = row + st.iy[b];
            for (std::size_t c = 0; c < m; ++c) out[c] += w * coeffs_[c][k];
        }
    }
}

double SplineSet::eval(std::size_t member, double x, double y) const noexcept {
    return eval_member(make_stencil(grid_, x, y), member);
}

double SplineSet::eval_member(const SplineStencil& st, std::size_t member) const noexcept {
    const std::vector<double>& cf = coeffs_[member];
    const int n = grid_.n;
    double acc = 0.0;
    for (int a = 0; a < 4; ++a) {
        const std::size_t row = static_cast<std::size_t>(st.ix[a]) * n;
        double r = 0.0;
        for (int b = 0; b < 4; ++b) r += st.wy[b] * cf[row + st.iy[b]];
        acc += st.wx[a] * r;
    }
    return acc;
}

double interpolate_bilinear(const ScalarField& f, double x, double y) noexcept {
    const GridSpec& g = f.grid();
    const SplineStencil st = make_stencil(g, x, y);
    // Stencil nodes 1 and 2 bracket the point.
    const double f00 = f(st.ix[1], st.iy[1]);
    const double f01 = f(st.ix[1], st.iy[2]);
    const double f10 = f(st.ix[2], st.iy[1]);
    const double f11 = f(st.ix[2], st.iy[2]);
    const double a = (1.0 - st.ty) * f00 + st.ty * f01;
    const double b = (1.0 - st.ty) * f10 + st.ty * f11;
    const double v = (1.0 - st.tx) * a + st.tx * b;
    const double lo = std::min(std::min(f00, f01), std::min(f10, f11));
    const double hi = std::max(std::max(f00, f01), std::max(f10, f11));
    return std::clamp(v, lo, hi);
}

std::vector<double> sample_monotone(const ScalarField& f, const std::vector<double>& px,
                                   const std::vector<double>& py, DensityInterp kind) {
    std::vector<double> out(px.size());
    const long long count = static_cast<long long>(px.size());
    if (kind == DensityInterp::Bilinear) {
#pragma omp parallel for schedule(static)
        for (long long k = 0; k < count; ++k) out[k] = interpolate_bilinear(f, px[k], py[k]);
    } else {
        const SplineSet spline({&f});
        const double lo = f.min(), hi = f.max();
#pragma omp parallel for schedule(static)
        for (long long k = 0; k < count; ++k) out[k] = std::clamp(spline.eval(0, px[k], py[k]), lo, hi);
    }
    return out;
}

}  // namespace densiflow
