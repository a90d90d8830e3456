#include "densiflow/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "densiflow/error.hpp"

namespace densiflow {

namespace {

const double kSqrtPi = std::sqrt(std::acos(-1.0));

void require_nonnegative_c(double c) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw Error(ErrorCode::DomainError, "kernel strength must be >= 0");
}

/// Bound on 2 int_T^inf t exp(-t^2 + c t) dt for T > c / 2.
double gauss_tail(double c, double T) { return std::exp(-T * T + c * T) * 2.0 * T / (2.0 * T - c); }

double tail_cutoff(double c, double target) {
    double T = 0.5 * c + 1.0;
    while (gauss_tail(c, T) >= target) T += 0.25;
    return T;
}

double simpson(double fa, double fm, double fb, double a, double b) { return (b - a) / 6.0 * (fa + 4.0 * fm + fb); }

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                        double whole, double eps, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(fa, flm, fm, a, m);
    const double right = simpson(fm, frm, fb, m, b);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double eps, int panels) {
    double total = 0.0;
    const double width = (b - a) / panels;
    for (int k = 0; k < panels; ++k) {
        const double lo = a + k * width;
        const double hi = lo + width;
        const double fa = f(lo);
        const double fm = f(0.5 * (lo + hi));
        const double fb = f(hi);
        total += adaptive_simpson(f, lo, hi, fa, fm, fb, simpson(fa, fm, fb, lo, hi), eps / panels, 50);
    }
    return total;
}

/// Kernel quadrature nodes x_j and weights on the graded grid, Simpson in r = sqrt(-ln x).
struct KernelRule {
    std::vector<double> x;
    std::vector<double> w;
};

KernelRule kernel_rule(double c, const GradedGrid& grading) {
    if (grading.nodes < 2 || !(grading.omitted_mass > 0.0) || !(grading.omitted_mass < 1.0))
        throw Error(ErrorCode::BadGrid, "graded grid needs >= 2 nodes and an omitted mass in (0, 1)");
    const int j_max = grading.nodes + (grading.nodes % 2);
    const double r_max = tail_cutoff(c, grading.omitted_mass * gauss_integral_closed_form(c));
    const double dr = r_max / j_max;
    KernelRule rule;
    rule.x.reserve(static_cast<std::size_t>(j_max));
    rule.w.reserve(static_cast<std::size_t>(j_max));
    for (int j = 1; j <= j_max; ++j) {
        const double r = j * dr;
        const double simpson_w = (j == j_max) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
        rule.x.push_back(std::exp(-r * r));
        rule.w.push_back(simpson_w * dr / 3.0 * 2.0 * r * std::exp(-r * r + c * r));
    }
    return rule;
}

double apply_rule(const KernelRule& rule, const PiecewiseLinear& f, double s) {
    double acc = 0.0;
    for (std::size_t j = 0; j < rule.x.size(); ++j) acc += rule.w[j] * f(s * rule.x[j]);
    return acc;
}

}  // namespace

double gauss_integral_closed_form(double c) {
    require_nonnegative_c(c);
    return 1.0 + 0.5 * kSqrtPi * c * std::exp(0.25 * c * c) * (1.0 + std::erf(0.5 * c));
}

double log_gauss_integral(double c) {
    require_nonnegative_c(c);
    if (c <= 20.0) return std::log(gauss_integral_closed_form(c));
    const double log_a = std::log(0.5 * kSqrtPi * c * (1.0 + std::erf(0.5 * c))) + 0.25 * c * c;
    return log_a + std::log1p(std::exp(-log_a));
}

double gauss_integral_quadrature(double c, double tol) {
    if (!(tol >= 1e-14 && tol <= 1e-6)) throw Error(ErrorCode::BadTol, "tol must lie in [1e-14, 1e-6]");
    require_nonnegative_c(c);
    const auto integrand = [c](double t) { return 2.0 * t * std::exp(-t * t + c * t); };
    // Values grow like e^{c^2/4}; the budget is absolute up to 1 and relative beyond.
    const double T0 = tail_cutoff(c, 1e-3);
    const double scale = std::max(1.0, integrate_adaptive(integrand, 0.0, T0, 1e-3, 8));
    const double budget = tol * scale;
    const double T = tail_cutoff(c, 0.5 * budget);
    return integrate_adaptive(integrand, 0.0, T, 0.5 * budget, 32);
}

AntiderivativeReport antiderivative_check(double c) {
    if (!(c > 0.0) || !std::isfinite(c)) throw Error(ErrorCode::DomainError, "antiderivative check needs c > 0");
    // F(x1) - F(x2). For small x the erf argument is large and erf is near 1,
    // so the erf difference is taken as an erfc difference to avoid cancellation.
    const auto difference = [c](double x1, double x2, double k) {
        const double r1 = std::sqrt(-std::log(x1));
        const double r2 = std::sqrt(-std::log(x2));
        const double a1 = 0.5 * (2.0 * r1 - c);
        const double a2 = 0.5 * (2.0 * r2 - c);
        const double derf = a1 > 0.0 && a2 > 0.0 ? std::erfc(a2) - std::erfc(a1) : std::erf(a1) - std::erf(a2);
        return x1 * std::exp(c * r1) - x2 * std::exp(c * r2) - 0.5 * kSqrtPi * c * std::exp(k * c * c) * derf;
    };
    const auto derivative = [&](double x, double k) {
        const auto cd = [&](double h) { return difference(x + h, x - h, k) / (2.0 * h); };
        const double h = 1e-3 * x;
        return (4.0 * cd(0.5 * h) - cd(h)) / 3.0;
    };
    AntiderivativeReport rep;
    const int nodes = 200;
    for (int j = 0; j <= nodes; ++j) {
        // Log-graded from 1e-8 to 0.9.
        const double x = std::exp(std::log(1e-8) + (std::log(0.9) - std::log(1e-8)) * j / nodes);
        const double f = std::exp(c * std::sqrt(-std::log(x)));
        rep.defect_quarter = std::max(rep.defect_quarter, std::abs(derivative(x, 0.25) - f) / f);
        rep.defect_half = std::max(rep.defect_half, std::abs(derivative(x, 0.5) - f) / f);
    }
    const bool quarter = rep.defect_quarter <= 1e-6;
    const bool half = rep.defect_half <= 1e-6;
    rep.verdict = quarter && half ? "both" : quarter ? "c^2/4" : half ? "c^2/2" : "neither";
    return rep;
}

double PiecewiseLinear::operator()(double s) const {
    if (s <= tau.front()) return value.front();
    if (s >= tau.back()) return value.back();
    const auto it = std::upper_bound(tau.begin(), tau.end(), s);
    const std::size_t k = static_cast<std::size_t>(it - tau.begin());
    const double w = (s - tau[k - 1]) / (tau[k] - tau[k - 1]);
    return (1.0 - w) * value[k - 1] + w * value[k];
}

double PiecewiseLinear::lp_power(double p) const {
    double acc = tau.front() * std::pow(value.front(), p);
    for (std::size_t k = 1; k < tau.size(); ++k) {
        const double a = value[k - 1];
        const double b = value[k];
        const double width = tau[k] - tau[k - 1];
        if (std::abs(b - a) <= 1e-12 * std::max(a, b)) {
            acc += width * std::pow(0.5 * (a + b), p);
        } else {
            acc += width * (std::pow(b, p + 1.0) - std::pow(a, p + 1.0)) / ((p + 1.0) * (b - a));
        }
    }
    return acc;
}

void PiecewiseLinear::validate() const {
    if (tau.empty() || tau.size() != value.size()) throw Error(ErrorCode::BadGrid, "nodes and values differ in size");
    if (!(tau.front() > 0.0)) throw Error(ErrorCode::BadGrid, "nodes must be positive");
    for (std::size_t k = 1; k < tau.size(); ++k)
        if (!(tau[k] > tau[k - 1])) throw Error(ErrorCode::BadGrid, "nodes must increase strictly");
    for (double v : value)
        if (!(v >= 0.0) || !std::isfinite(v)) throw Error(ErrorCode::BadGrid, "samples must be finite and >= 0");
}

std::vector<double> kernel_apply(const PiecewiseLinear& f, double c, const std::vector<double>& s,
                                 const GradedGrid& grading) {
    f.validate();
    require_nonnegative_c(c);
    const KernelRule rule = kernel_rule(c, grading);
    std::vector<double> out;
    out.reserve(s.size());
    for (double si : s) {
        if (!(si > 0.0) || si > f.horizon() * (1.0 + 1e-12))
            throw Error(ErrorCode::BadGrid, "evaluation points must lie in (0, t]");
        out.push_back(apply_rule(rule, f, si));
    }
    return out;
}

namespace {

double kernel_ratio_with(const KernelRule& rule, const PiecewiseLinear& f, double p, double g_const) {
    // Below the first node f is constant, so Tf equals the kernel mass times that constant.
    const double s0 = f.tau.front();
    const double t = f.horizon();
    double lhs = s0 * std::pow(g_const * f.value.front(), p);
    if (t > s0) {
        const int m = 300;  // even, Simpson in u = ln s
        const double u0 = std::log(s0);
        const double du = (std::log(t) - u0) / m;
        double acc = 0.0;
        for (int k = 0; k <= m; ++k) {
            const double s = std::exp(u0 + k * du);
            const double w = (k == 0 || k == m) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
            acc += w * std::pow(apply_rule(rule, f, s), p) * s;
        }
        lhs += acc * du / 3.0;
    }
    const double rhs = f.lp_power(p);
    return rhs > 0.0 ? lhs / rhs : 0.0;
}

void require_exponent(double p) {
    if (!(p > 1.0) || !std::isfinite(p)) throw Error(ErrorCode::BadExponent, "p must lie in (1, inf)");
}

}  // namespace

double kernel_ratio(const PiecewiseLinear& f, double c, double p, const GradedGrid& grading) {
    f.validate();
    require_nonnegative_c(c);
    require_exponent(p);
    const KernelRule rule = kernel_rule(c, grading);
    double g = 0.0;
    for (double w : rule.w) g += w;
    return kernel_ratio_with(rule, f, p, g);
}

double kernel_l_bound(double c, double p, double* q_best) {
    require_exponent(p);
    require_nonnegative_c(c);
    const int count = 400;
    double best = kInf;
    double arg = 0.0;
    for (int k = 1; k <= count; ++k) {
        const double q = 1.0 + (p - 1.0) * k / (count + 1.0);
        const double q_conj = q / (q - 1.0);
        const double log_l = (p / q) * std::log(p / (p - q)) + (p / q_conj) * log_gauss_integral(c * q_conj);
        if (log_l < best) {
            best = log_l;
            arg = q;
        }
    }
    if (q_best != nullptr) *q_best = arg;
    return std::exp(best);
}

PiecewiseLinear random_trial_function(double p, double t, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int breakpoints = 8 + static_cast<int>(rng() % 24);
    std::vector<double> unit_tau;
    for (int k = 0; k < breakpoints; ++k) unit_tau.push_back(std::pow(10.0, -6.0 * unit(rng)));
    unit_tau.push_back(1.0);
    std::sort(unit_tau.begin(), unit_tau.end());
    unit_tau.erase(std::unique(unit_tau.begin(), unit_tau.end()), unit_tau.end());

    const int family = static_cast<int>(rng() % 3);
    const double eps = 0.01 + 0.29 * unit(rng);
    PiecewiseLinear f;
    for (double u : unit_tau) {
        double v = 0.0;
        switch (family) {
            case 0: v = unit(rng); break;
            case 1: v = std::pow(u, -1.0 / p + eps) * (1.0 + 0.2 * unit(rng)); break;
            default: v = unit(rng) < 0.5 ? 0.0 : unit(rng) * std::pow(u, -0.5 / p); break;
        }
        f.tau.push_back(t * u);
        f.value.push_back(v);
    }
    if (std::all_of(f.value.begin(), f.value.end(), [](double v) { return v == 0.0; })) f.value.back() = 1.0;
    return f;
}

KernelBoundReport kernel_bound_check(double c, double p, double t, int trials, std::uint64_t seed) {
    require_exponent(p);
    require_nonnegative_c(c);
    if (!(t > 0.0)) throw Error(ErrorCode::BadParams, "horizon must be positive");
    if (trials < 1) throw Error(ErrorCode::BadParams, "at least one trial required");
    KernelBoundReport rep;
    rep.l_bound = kernel_l_bound(c, p, &rep.q_best);
    const KernelRule rule = kernel_rule(c, GradedGrid{400, 1e-8});
    double g = 0.0;
    for (double w : rule.w) g += w;

    std::vector<double> ratios(static_cast<std::size_t>(trials) + 1, 0.0);
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k <= trials; ++k) {
        PiecewiseLinear f;
        if (k == 0) {
            f.tau = {t};
            f.value = {1.0};
        } else {
            f = random_trial_function(p, t, seed + static_cast<std::uint64_t>(k));
        }
        ratios[static_cast<std::size_t>(k)] = kernel_ratio_with(rule, f, p, g);
    }
    rep.empirical_ratio_max = *std::max_element(ratios.begin(), ratios.end());
    rep.pass = rep.empirical_ratio_max <= rep.l_bound * (1.0 + 1e-3);
    return rep;
}

CheckResult minkowski_check(const SampleMatrix& f, double p) {
    require_exponent(p);
    if (f.rows < 1 || f.cols < 1 || f.data.size() != static_cast<std::size_t>(f.rows) * f.cols)
        throw Error(ErrorCode::BadGrid, "matrix shape does not match its samples");
    for (double v : f.data)
        if (!(v >= 0.0)) throw Error(ErrorCode::NegativeEntries, "samples must be nonnegative");
    double lhs = 0.0;
    for (int i = 0; i < f.rows; ++i) {
        double inner_sum = 0.0;
        for (int j = 0; j < f.cols; ++j) inner_sum += f(i, j) * f.dy;
        lhs += std::pow(inner_sum, p) * f.dx;
    }
    lhs = std::pow(lhs, 1.0 / p);
    double rhs = 0.0;
    for (int j = 0; j < f.cols; ++j) {
        double col = 0.0;
        for (int i = 0; i < f.rows; ++i) col += std::pow(f(i, j), p) * f.dx;
        rhs += std::pow(col, 1.0 / p) * f.dy;
    }
    return make_check(lhs, rhs, 1e-12);
}

}  // namespace densiflow
