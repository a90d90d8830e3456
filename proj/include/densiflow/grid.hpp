#pragma once

#include <cstddef>
#include <numbers>

namespace densiflow {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Uniform periodic grid on [0, L)^2 with n cells per axis.
struct GridSpec {
    int n = 128;
    double length = kTwoPi;

    /// Validated constructor; n must be a power of two and at least 8.
    static GridSpec make(int n, double length = kTwoPi);

    [[nodiscard]] double spacing() const noexcept { return length / n; }
    [[nodiscard]] std::size_t size() const noexcept {
        return static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
    }
    /// Number of complex columns kept by the real-to-complex transform.
    [[nodiscard]] int half() const noexcept { return n / 2 + 1; }
    [[nodiscard]] std::size_t spectral_size() const noexcept {
        return static_cast<std::size_t>(n) * static_cast<std::size_t>(half());
    }
    /// Angular wavenumber of row index i (signed frequencies).
    [[nodiscard]] double kx(int i) const noexcept {
        const int m = i <= n / 2 ? i : i - n;
        return kTwoPi / length * m;
    }
    /// Angular wavenumber of column index j of the half plane.
    [[nodiscard]] double ky(int j) const noexcept { return kTwoPi / length * j; }
    /// Signed integer frequency of row index i.
    [[nodiscard]] int mode_x(int i) const noexcept { return i <= n / 2 ? i : i - n; }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

bool is_power_of_two(int n) noexcept;

}  // namespace densiflow
