#pragma once

#include <complex>
#include <vector>

#include "densiflow/fields.hpp"

namespace densiflow {

using Complex = std::complex<double>;

/// Half-plane Fourier coefficients of a real field, normalized so that
/// coefficient (0,0) is the mean. Index i*(n/2+1) + j.
struct Spectrum {
    GridSpec grid{};
    std::vector<Complex> coeffs;

    Spectrum() = default;
    explicit Spectrum(const GridSpec& g) : grid(g), coeffs(g.spectral_size()) {}

    Complex& operator()(int i, int j) noexcept { return coeffs[static_cast<std::size_t>(i) * grid.half() + j]; }
    Complex operator()(int i, int j) const noexcept {
        return coeffs[static_cast<std::size_t>(i) * grid.half() + j];
    }
};

Spectrum forward(const ScalarField& f);
ScalarField inverse(const Spectrum& s);
/// Inverse transform into preallocated output (input is left intact).
void inverse_into(const Spectrum& s, ScalarField& out);
void forward_into(const ScalarField& f, Spectrum& out);

/// Multiplicity of column j in the half plane (1 on the axes, 2 inside).
inline double half_plane_weight(const GridSpec& g, int j) noexcept {
    return (j == 0 || j == g.n / 2) ? 1.0 : 2.0;
}

/// True if the mode survives 2/3 truncation.
inline bool in_band(const GridSpec& g, int i, int j) noexcept {
    const int mx = g.mode_x(i);
    return 3 * (mx < 0 ? -mx : mx) < g.n && 3 * j < g.n;
}

Spectrum derivative_x(const Spectrum& s);
Spectrum derivative_y(const Spectrum& s);
void truncate(Spectrum& s);
/// Real inner product of two real fields given by their spectra, divided by L^2.
double spectral_dot(const Spectrum& a, const Spectrum& b);

}  // namespace densiflow
