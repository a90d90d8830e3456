#include "densiflow/stability_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "densiflow/error.hpp"

namespace densiflow {

namespace {

constexpr double kTimeMatch = 1e-12;

double sq(double v) { return v * v; }

/// Trapezoid error estimate sum_k d_k^3 / 12 |f''| with f'' from neighbouring second differences.
std::vector<double> cumulative_trapezoid_error(const std::vector<double>& t, const std::vector<double>& f) {
    const std::size_t m = t.size();
    std::vector<double> out(m, 0.0);
    if (m < 3) return out;
    std::vector<double> curvature(m - 2);
    for (std::size_t k = 1; k + 1 < m; ++k) {
        const double h0 = t[k] - t[k - 1];
        const double h1 = t[k + 1] - t[k];
        const double slope1 = (f[k + 1] - f[k]) / h1;
        const double slope0 = (f[k] - f[k - 1]) / h0;
        curvature[k - 1] = 2.0 * std::abs(slope1 - slope0) / (h0 + h1);
    }
    for (std::size_t k = 1; k < m; ++k) {
        // Interval [k-1, k] takes the curvature of the nearest interior node.
        const std::size_t c = std::min(k - 1, curvature.size() - 1);
        const double d = t[k] - t[k - 1];
        out[k] = out[k - 1] + d * d * d / 12.0 * curvature[c];
    }
    return out;
}

double linear_in_time(const std::vector<double>& t, const std::vector<double>& v, double s) {
    if (s <= t.front()) return v.front();
    if (s >= t.back()) return v.back();
    const auto it = std::upper_bound(t.begin(), t.end(), s);
    const std::size_t k = static_cast<std::size_t>(it - t.begin());
    const double w = (s - t[k - 1]) / (t[k] - t[k - 1]);
    return (1.0 - w) * v[k - 1] + w * v[k];
}

/// Energy gap of a trajectory at each stored instant.
std::vector<double> stored_energy_gaps(const Trajectory& traj) {
    const EnergyReport rep = energy_report(traj);
    std::vector<double> out;
    out.reserve(traj.states.size());
    std::size_t d = 0;
    for (const State& s : traj.states) {
        while (d + 1 < rep.t.size() && rep.t[d] < s.t - kTimeMatch) ++d;
        out.push_back(d < rep.gap.size() ? rep.gap[d] : 0.0);
    }
    return out;
}

/// rho du_i du_j d_j w_i integrated over the torus.
double convective_pairing(const ScalarField& rho, const VectorField2& du, const VectorField2& w) {
    const VectorField2 gx = gradient(w.x);
    const VectorField2 gy = gradient(w.y);
    double acc = 0.0;
    for (std::size_t k = 0; k < rho.size(); ++k) {
        const double a = du.x[k];
        const double b = du.y[k];
        acc += rho[k] * (a * (a * gx.x[k] + b * gx.y[k]) + b * (a * gy.x[k] + b * gy.y[k]));
    }
    const double h = rho.grid().spacing();
    return acc * h * h;
}

double sq_grad(const VectorField2& v) { return sq(seminorm_grad(v, 2.0)); }

}  // namespace

void require_compatible(const Trajectory& a, const Trajectory& b) {
    if (a.states.empty() || b.states.empty()) throw Error(ErrorCode::GridMismatch, "empty trajectory");
    if (!(a.grid() == b.grid())) throw Error(ErrorCode::GridMismatch, "trajectories live on different grids");
    if (a.config.nu != b.config.nu) throw Error(ErrorCode::GridMismatch, "trajectories use different viscosities");
    if (a.states.size() != b.states.size()) throw Error(ErrorCode::GridMismatch, "stored time grids differ");
    for (std::size_t k = 0; k < a.states.size(); ++k)
        if (std::abs(a.states[k].t - b.states[k].t) > kTimeMatch)
            throw Error(ErrorCode::GridMismatch, "stored time grids differ");
    const ScalarField& ra = a.states.front().rho;
    const ScalarField& rb = b.states.front().rho;
    for (std::size_t k = 0; k < ra.size(); ++k)
        if (ra[k] != rb[k]) throw Error(ErrorCode::GridMismatch, "initial densities differ");
}

PairDiagnostics pair_diagnostics(const Trajectory& a, const Trajectory& b) {
    require_compatible(a, b);
    PairDiagnostics pd;
    std::vector<double> grad_sq;
    double sup = 0.0;
    for (std::size_t k = 0; k < a.states.size(); ++k) {
        const VectorField2 du = a.states[k].u - b.states[k].u;
        const double l2 = norm(du, 2.0);
        const double g = seminorm_grad(du, 2.0);
        pd.t.push_back(a.states[k].t);
        pd.delta_u_l2.push_back(l2);
        pd.delta_grad_l2.push_back(g);
        grad_sq.push_back(g * g);
        sup = std::max(sup, l2 * l2);
    }
    pd.norm_e_delta = sup + a.config.nu * cumulative_trapezoid(pd.t, grad_sq).back();
    return pd;
}

double CauchyTable::max_ratio() const {
    double out = 0.0;
    for (const CauchyEntry& e : entries)
        if (!e.degenerate) out = std::max(out, e.ratio);
    return out;
}

double CauchyTable::min_ratio() const {
    double out = kInf;
    for (const CauchyEntry& e : entries)
        if (!e.degenerate) out = std::min(out, e.ratio);
    return out;
}

namespace {

CauchyEntry cauchy_entry(int n, int m, const Trajectory& a, const Trajectory& b) {
    CauchyEntry e;
    e.n = n;
    e.m = m;
    const PairDiagnostics pd = pair_diagnostics(a, b);
    e.initial_gap = pd.delta_u_l2.front();
    e.norm_e_delta = pd.norm_e_delta;
    const double denom = e.initial_gap * e.initial_gap;
    e.degenerate = !(denom > 1e-14);
    e.ratio = e.degenerate ? 0.0 : e.norm_e_delta / denom;
    return e;
}

}  // namespace

CauchyTable cauchy_table(const std::vector<int>& levels, const std::vector<const Trajectory*>& runs) {
    if (levels.size() != runs.size()) throw Error(ErrorCode::BadParams, "one trajectory per level required");
    std::vector<std::size_t> order(levels.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return levels[i] < levels[j]; });
    CauchyTable table;
    for (std::size_t k : order) {
        if (!table.levels.empty() && table.levels.back() == levels[k])
            throw Error(ErrorCode::BadParams, "levels must be distinct");
        table.levels.push_back(levels[k]);
    }
    for (std::size_t i = 0; i < order.size(); ++i)
        for (std::size_t j = i + 1; j < order.size(); ++j)
            table.entries.push_back(
                cauchy_entry(levels[order[i]], levels[order[j]], *runs[order[i]], *runs[order[j]]));
    return table;
}

CauchyTable cauchy_experiment(const ScalarField& rho0, const VectorField2& u0, const std::vector<int>& levels,
                              const SolverConfig& cfg, std::vector<Trajectory>* runs) {
    if (levels.empty()) throw Error(ErrorCode::BadParams, "no mollification levels");
    for (int n : levels)
        if (n < 1) throw Error(ErrorCode::BadParams, "mollification levels must be positive");
    std::vector<Trajectory> local;
    local.reserve(levels.size());
    for (int n : levels) local.push_back(run(rho0, mollify(u0, MollifierLevel{n}), cfg));
    std::vector<const Trajectory*> ptrs;
    for (const Trajectory& tr : local) ptrs.push_back(&tr);
    CauchyTable table = cauchy_table(levels, ptrs);
    if (runs != nullptr) *runs = std::move(local);
    return table;
}

VectorField2 material_acceleration(const State& s, const SolverConfig& cfg) {
    VectorField2 a = acceleration(s, cfg);
    const VectorField2 gx = gradient(s.u.x);
    const VectorField2 gy = gradient(s.u.y);
    for (std::size_t k = 0; k < a.x.size(); ++k) {
        a.x[k] += s.u.x[k] * gx.x[k] + s.u.y[k] * gx.y[k];
        a.y[k] += s.u.x[k] * gy.x[k] + s.u.y[k] * gy.y[k];
    }
    return a;
}

RelativeEnergyReport relative_energy_check(const Trajectory& traj1, const Trajectory& traj2) {
    require_compatible(traj1, traj2);
    const double nu = traj1.config.nu;
    const std::size_t m = traj1.states.size();
    RelativeEnergyReport rep;
    std::vector<double> kinetic(m), dissipation(m), source(m);
    for (std::size_t k = 0; k < m; ++k) {
        const State& s1 = traj1.states[k];
        const State& s2 = traj2.states[k];
        const VectorField2 du = s1.u - s2.u;
        const ScalarField drho = s1.rho - s2.rho;
        rep.t.push_back(s1.t);
        kinetic[k] = 0.5 * weighted_energy(s1.rho, du);
        dissipation[k] = nu * sq_grad(du);
        const VectorField2 udot = material_acceleration(s2, traj2.config);
        const VectorField2 weighted(pointwise(drho, udot.x), pointwise(drho, udot.y));
        source[k] = -inner(weighted, du) - convective_pairing(s1.rho, du, s2.u);
    }
    const std::vector<double> int_diss = cumulative_trapezoid(rep.t, dissipation);
    const std::vector<double> int_src = cumulative_trapezoid(rep.t, source);
    const std::vector<double> err_diss = cumulative_trapezoid_error(rep.t, dissipation);
    const std::vector<double> err_src = cumulative_trapezoid_error(rep.t, source);
    const std::vector<double> gap1 = stored_energy_gaps(traj1);
    const std::vector<double> gap2 = stored_energy_gaps(traj2);
    const double initial = kinetic.front();  // rho_1(0) = rho_0
    rep.worst = -kInf;
    for (std::size_t k = 0; k < m; ++k) {
        const double lhs = kinetic[k] + int_diss[k];
        const double rhs = initial + int_src[k];
        const double scale = std::max(std::abs(lhs), std::abs(rhs));
        const double tol = std::abs(gap1[k]) + std::abs(gap2[k]) + err_diss[k] + err_src[k] + 1e-12 * scale;
        const bool ok = lhs <= rhs + tol;
        rep.lhs.push_back(lhs);
        rep.rhs.push_back(rhs);
        rep.tol.push_back(tol);
        rep.pass.push_back(ok);
        rep.all_pass = rep.all_pass && ok;
        if (tol > 0.0) rep.worst = std::max(rep.worst, (lhs - rhs) / tol);
        else if (lhs > rhs) rep.worst = kInf;
    }
    if (rep.worst == -kInf) rep.worst = 0.0;
    return rep;
}

std::vector<TestFunctionSpec> default_test_functions(const GridSpec& grid) {
    const double w = kTwoPi / grid.length;
    const double c = 0.5 * grid.length;
    const double radius = 0.25 * grid.length;
    std::vector<TestFunctionSpec> out;
    out.push_back({"sin_x_sin_y", ScalarField::from_function(grid, [w](double x, double y) {
                       return std::sin(w * x) * std::sin(w * y);
                   })});
    out.push_back({"cos_x_plus_sin_2y", ScalarField::from_function(grid, [w](double x, double y) {
                       return std::cos(w * x) + 0.5 * std::sin(2.0 * w * y);
                   })});
    out.push_back({"bump", ScalarField::from_function(grid, [c, radius](double x, double y) {
                       const double r2 = (sq(x - c) + sq(y - c)) / sq(radius);
                       return r2 < 1.0 ? std::pow(1.0 - r2, 4) : 0.0;
                   })});
    out.push_back({"one", ScalarField(grid, 1.0)});
    return out;
}

double log_kernel_integral(double z, double s, const std::function<double(double)>& g, int nodes) {
    if (!(s > 0.0)) throw Error(ErrorCode::NonPositiveTimes, "kernel integral needs s > 0");
    if (nodes < 2) throw Error(ErrorCode::BadParams, "kernel quadrature needs nodes");
    const int j_max = nodes + (nodes % 2);  // Simpson needs an even count
    // x = exp(-r^2) turns the integral into s int_0^inf 2 r exp(-r^2 + z r) g(s e^{-r^2}) dr;
    // the Gaussian factor peaks at z / 2 and is below e^-64 eight units later.
    const double r_max = 0.5 * std::max(z, 0.0) + 8.0;
    const double dr = r_max / j_max;
    std::vector<double> logs;
    logs.reserve(static_cast<std::size_t>(j_max));
    double peak = -kInf;
    for (int j = 1; j <= j_max; ++j) {
        const double r = j * dr;
        const double gv = g(s * std::exp(-r * r));
        if (!(gv > 0.0)) continue;
        const double weight = (j == j_max) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
        const double v = std::log(weight * 2.0 * r * gv) - r * r + z * r;
        logs.push_back(v);
        peak = std::max(peak, v);
    }
    if (logs.empty()) return -kInf;
    double acc = 0.0;
    for (double v : logs) acc += std::exp(v - peak);
    return std::log(s) + std::log(dr / 3.0) + peak + std::log(acc);
}

WminusReport wminus14_check(const Trajectory& traj1, const Trajectory& traj2,
                            const std::vector<TestFunctionSpec>& phis, const std::vector<double>& s_list,
                            double kappa, std::optional<double> z_override) {
    require_compatible(traj1, traj2);
    if (!(kappa > 0.0)) throw Error(ErrorCode::BadParams, "kappa must be positive");
    WminusReport rep;
    rep.kappa = kappa;
    rep.z_norm = z_override ? *z_override : norm_z(traj2);
    const std::vector<double> t = traj1.times();
    const std::size_t m = t.size();
    std::vector<double> energy_root(m), grad_root(m);
    for (std::size_t k = 0; k < m; ++k) {
        const VectorField2 du = traj1.states[k].u - traj2.states[k].u;
        energy_root[k] = std::pow(weighted_energy(traj1.states[k].rho, du), 0.25);
        grad_root[k] = std::sqrt(seminorm_grad(du, 2.0));
    }
    const double mass = integral(traj1.states.front().rho);
    for (const TestFunctionSpec& spec : phis) {
        require_same_grid(spec.phi.grid(), traj1.grid());
        const double grad_phi = seminorm_grad(spec.phi, 4.0 / 3.0);
        std::vector<double> pairing(m);
        for (std::size_t k = 0; k < m; ++k)
            pairing[k] = inner(traj1.states[k].rho - traj2.states[k].rho, spec.phi);
        for (double s : s_list) {
            if (!(s > t.front()) || s > t.back() + kTimeMatch)
                throw Error(ErrorCode::DomainError, "pairing time outside the trajectory");
            WminusEntry e;
            e.phi = spec.name;
            e.s = s;
            e.lhs = std::abs(linear_in_time(t, pairing, s));
            double sup = linear_in_time(t, energy_root, s);
            for (std::size_t k = 0; k < m && t[k] <= s; ++k) sup = std::max(sup, energy_root[k]);
            const double log_kernel = log_kernel_integral(
                rep.z_norm, s, [&](double tau) { return linear_in_time(t, grad_root, tau); });
            if (grad_phi > 0.0 && sup > 0.0 && log_kernel > -kInf) {
                e.log_rhs = std::log(sup) + std::log(grad_phi) + log_kernel;
                e.rhs = std::exp(e.log_rhs);
                e.ratio = e.lhs > 0.0 ? std::exp(std::log(e.lhs) - e.log_rhs) : 0.0;
                e.pass = e.ratio <= kappa;
            } else {
                e.log_rhs = -kInf;
                e.rhs = 0.0;
                e.degenerate_zero = e.lhs <= 1e-12 * std::abs(mass);
                e.ratio = e.lhs > 0.0 && !e.degenerate_zero ? kInf : 0.0;
                e.pass = e.degenerate_zero;
            }
            rep.pass = rep.pass && e.pass;
            rep.worst_ratio = std::max(rep.worst_ratio, e.ratio);
            rep.entries.push_back(e);
        }
    }
    return rep;
}

StabilityConstantReport stability_constant(
    const std::vector<std::pair<const Trajectory*, const Trajectory*>>& pairs) {
    StabilityConstantReport rep;
    bool any = false;
    for (const auto& [a, b] : pairs) {
        const PairDiagnostics pd = pair_diagnostics(*a, *b);
        const double gap = pd.delta_u_l2.front();
        const bool degenerate = !(gap > 1e-14);
        const double value = degenerate ? 0.0 : pd.norm_e_delta / (gap * gap);
        rep.per_pair.push_back(value);
        rep.degenerate.push_back(degenerate);
        rep.u0_norm.push_back(norm(a->states.front().u, 2.0));
        if (!degenerate) {
            rep.c = std::max(rep.c, value);
            any = true;
        }
    }
    if (!any) throw Error(ErrorCode::DegeneratePair, "every pair has identical initial velocities");
    return rep;
}

VacuumReport vacuum_check(const Trajectory& traj) {
    VacuumReport rep;
    rep.pass = true;
    const DensityBounds& b = traj.config.bounds;
    for (const StepDiagnostics& d : traj.diagnostics) {
        rep.t.push_back(d.t);
        rep.min_rho.push_back(d.rho_min);
        rep.max_rho.push_back(d.rho_max);
        if (d.rho_min < b.c0 - 1e-12 || d.rho_max > b.C0 + 1e-12) rep.pass = false;
    }
    return rep;
}

GronwallClosure gronwall_closure(const Trajectory& traj1, const Trajectory& traj2) {
    const RelativeEnergyReport rel = relative_energy_check(traj1, traj2);
    const std::size_t m = rel.t.size();
    std::vector<double> g(m);
    for (std::size_t k = 0; k < m; ++k) {
        const State& s = traj2.states[k];
        const VectorField2 udot = material_acceleration(s, traj2.config);
        g[k] = sq_grad(s.u) + sq(s.t) * sq_grad(udot);
    }
    std::vector<double> gf(m);
    for (std::size_t k = 0; k < m; ++k) gf[k] = g[k] * rel.lhs[k];
    const std::vector<double> igf = cumulative_trapezoid(rel.t, gf);
    GronwallClosure out;
    out.a = rel.lhs.front();
    for (std::size_t k = 0; k < m; ++k) out.a = std::max(out.a, rel.lhs[k] - igf[k]);
    out.report = gronwall_check(rel.t, rel.lhs, out.a, g);
    return out;
}

}  // namespace densiflow
