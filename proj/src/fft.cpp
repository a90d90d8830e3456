#include "densiflow/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>

namespace densiflow {
namespace {

struct PlanPair {
    fftw_plan r2c = nullptr;
    fftw_plan c2r = nullptr;
};

/// Plans are created once per grid size; execution uses the new-array
/// interface, which is thread safe.
class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    PlanPair get(int n) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = plans_.find(n);
        if (it != plans_.end()) return it->second;
        const std::size_t real_count = static_cast<std::size_t>(n) * n;
        const std::size_t complex_count = static_cast<std::size_t>(n) * (n / 2 + 1);
        double* r = fftw_alloc_real(real_count);
        fftw_complex* c = fftw_alloc_complex(complex_count);
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        PlanPair p;
        p.r2c = fftw_plan_dft_r2c_2d(n, n, r, c, flags);
        p.c2r = fftw_plan_dft_c2r_2d(n, n, c, r, flags);
        fftw_free(r);
        fftw_free(c);
        plans_.emplace(n, p);
        return p;
    }

    ~PlanCache() {
        for (auto& [n, p] : plans_) {
            fftw_destroy_plan(p.r2c);
            fftw_destroy_plan(p.c2r);
        }
    }

private:
    std::mutex mutex_;
    std::map<int, PlanPair> plans_;
};

}  // namespace

void forward_into(const ScalarField& f, Spectrum& out) {
    const GridSpec& g = f.grid();
    if (out.grid != g || out.coeffs.size() != g.spectral_size()) out = Spectrum(g);
    const PlanPair p = PlanCache::instance().get(g.n);
    // r2c leaves its input untouched.
    fftw_execute_dft_r2c(p.r2c, const_cast<double*>(f.data()),
                         reinterpret_cast<fftw_complex*>(out.coeffs.data()));
    const double scale = 1.0 / static_cast<double>(g.size());
    for (auto& c : out.coeffs) c *= scale;
}

Spectrum forward(const ScalarField& f) {
    Spectrum s(f.grid());
    forward_into(f, s);
    return s;
}

void inverse_into(const Spectrum& s, ScalarField& out) {
    const GridSpec& g = s.grid;
    if (out.grid() != g || out.size() != g.size()) out = ScalarField(g);
    const PlanPair p = PlanCache::instance().get(g.n);
    // c2r overwrites its input, so work on a copy.
    std::vector<Complex> scratch(s.coeffs);
    fftw_execute_dft_c2r(p.c2r, reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
}

ScalarField inverse(const Spectrum& s) {
    ScalarField out(s.grid);
    inverse_into(s, out);
    return out;
}

Spectrum derivative_x(const Spectrum& s) {
    const GridSpec& g = s.grid;
    Spectrum d(g);
    const int h = g.half();
    for (int i = 0; i < g.n; ++i) {
        const double k = (i == g.n / 2) ? 0.0 : g.kx(i);
        for (int j = 0; j < h; ++j) d(i, j) = Complex(0.0, k) * s(i, j);
    }
    return d;
}

Spectrum derivative_y(const Spectrum& s) {
    const GridSpec& g = s.grid;
    Spectrum d(g);
    const int h = g.half();
    for (int i = 0; i < g.n; ++i) {
        for (int j = 0; j < h; ++j) {
            const double k = (j == g.n / 2) ? 0.0 : g.ky(j);
            d(i, j) = Complex(0.0, k) * s(i, j);
        }
    }
    return d;
}

void truncate(Spectrum& s) {
    const GridSpec& g = s.grid;
    const int h = g.half();
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < h; ++j)
            if (!in_band(g, i, j)) s(i, j) = 0.0;
}

double spectral_dot(const Spectrum& a, const Spectrum& b) {
    const GridSpec& g = a.grid;
    const int h = g.half();
    double acc = 0.0;
    for (int i = 0; i < g.n; ++i) {
        for (int j = 0; j < h; ++j) {
            const Complex x = a(i, j);
            const Complex y = b(i, j);
            acc += half_plane_weight(g, j) * (x.real() * y.real() + x.imag() * y.imag());
        }
    }
    return acc;
}

}  // namespace densiflow
