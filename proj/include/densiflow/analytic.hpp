#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "densiflow/transport.hpp"

namespace densiflow {

/// int_0^1 exp(c sqrt(-ln x)) dx = 1 + sqrt(pi)/2 c e^{c^2/4} (1 + erf(c/2)).
double gauss_integral_closed_form(double c);

/// Logarithm of the closed form, finite for every c >= 0.
double log_gauss_integral(double c);

/// Independent oracle: 2 int_0^inf t exp(-t^2 + c t) dt by a tail bound plus adaptive Simpson.
/// Throws BadTol unless tol lies in [1e-14, 1e-6].
double gauss_integral_quadrature(double c, double tol);

struct AntiderivativeReport {
    double defect_quarter = 0.0;  // exponent c^2/4
    double defect_half = 0.0;     // exponent c^2/2
    /// "c^2/4", "c^2/2", "both" or "neither" by the 1e-6 criterion.
    std::string verdict;
};

/// F(x) = x e^{c r} - sqrt(pi)/2 c e^{kc^2} erf((2r - c)/2), r = sqrt(-ln x), for k = 1/4 and k = 1/2,
/// differentiated numerically against exp(c r). Defects are max relative errors.
AntiderivativeReport antiderivative_check(double c);

/// Nonnegative piecewise-linear function on (0, t]; constant below the first node.
struct PiecewiseLinear {
    std::vector<double> tau;
    std::vector<double> value;

    [[nodiscard]] double operator()(double s) const;
    /// Exact int_0^t |f|^p.
    [[nodiscard]] double lp_power(double p) const;
    [[nodiscard]] double horizon() const { return tau.back(); }
    /// Throws BadGrid on unsorted, nonpositive or mismatched nodes.
    void validate() const;
};

/// Graded grid x_j = exp(-(j/J)^2 Lambda); Lambda follows from the omitted-mass target.
struct GradedGrid {
    int nodes = 2000;
    double omitted_mass = 1e-8;
};

/// Tf(s) = int_0^1 exp(c sqrt(-ln x)) f(s x) dx at each s.
std::vector<double> kernel_apply(const PiecewiseLinear& f, double c, const std::vector<double>& s,
                                 const GradedGrid& grading = {});

/// int_0^t |Tf|^p / int_0^t |f|^p with the outer integral on a log-graded s grid.
double kernel_ratio(const PiecewiseLinear& f, double c, double p, const GradedGrid& grading = {});

struct KernelBoundReport {
    double empirical_ratio_max = 0.0;
    double l_bound = 0.0;
    /// Auxiliary exponent attaining l_bound.
    double q_best = 0.0;
    bool pass = false;
};

/// Smallest proof constant (p/(p-q))^{p/q} G(c q')^{p/q'} over a q grid, q' = q/(q-1).
double kernel_l_bound(double c, double p, double* q_best = nullptr);

/// Seeded random nonnegative piecewise-linear trials on (0, t]; trials scale with t.
PiecewiseLinear random_trial_function(double p, double t, std::uint64_t seed);

KernelBoundReport kernel_bound_check(double c, double p, double t, int trials, std::uint64_t seed);

/// Samples F(x_i, y_j) on a product of uniform grids, row-major in i.
struct SampleMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;
    double dx = 1.0;
    double dy = 1.0;

    [[nodiscard]] double operator()(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }
};

/// lhs = || int F(., y) dy ||_p, rhs = int ||F(., y)||_p dy; pass = lhs <= rhs (1 + 1e-12).
CheckResult minkowski_check(const SampleMatrix& f, double p);

}  // namespace densiflow
