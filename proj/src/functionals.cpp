#include "densiflow/functionals.hpp"

#include <algorithm>
#include <cmath>

#include "densiflow/error.hpp"

namespace densiflow {

std::vector<double> cumulative_trapezoid(const std::vector<double>& t, const std::vector<double>& f) {
    std::vector<double> out(t.size(), 0.0);
    for (std::size_t k = 1; k < t.size(); ++k) out[k] = out[k - 1] + 0.5 * (t[k] - t[k - 1]) * (f[k] + f[k - 1]);
    return out;
}

std::vector<ScalarField> time_derivative(const std::vector<double>& t, const std::vector<const ScalarField*>& f) {
    const std::size_t m = t.size();
    if (m < 3 || f.size() != m) throw Error(ErrorCode::TooFewSnapshots, "time derivative needs three snapshots");
    std::vector<ScalarField> out;
    out.reserve(m);
    for (std::size_t k = 0; k < m; ++k) {
        // Three-point Lagrange derivative on the stencil (a, b, c), evaluated at node k.
        std::size_t a = 0;
        if (k == 0) a = 0;
        else if (k == m - 1) a = m - 3;
        else a = k - 1;
        const double ta = t[a], tb = t[a + 1], tc = t[a + 2];
        const double x = t[k];
        const double wa = ((x - tb) + (x - tc)) / ((ta - tb) * (ta - tc));
        const double wb = ((x - ta) + (x - tc)) / ((tb - ta) * (tb - tc));
        const double wc = ((x - ta) + (x - tb)) / ((tc - ta) * (tc - tb));
        ScalarField d = wa * *f[a];
        d.axpy(wb, *f[a + 1]);
        d.axpy(wc, *f[a + 2]);
        out.push_back(std::move(d));
    }
    return out;
}

ScalarField material(const ScalarField& dadt, const ScalarField& a, const VectorField2& u) {
    const VectorField2 g = gradient(a);
    ScalarField out = dadt;
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += u.x[k] * g.x[k] + u.y[k] * g.y[k];
    return out;
}

namespace {

double sq_l2(const ScalarField& f) {
    const double n = norm(f, 2.0);
    return n * n;
}

double sq_l2(const VectorField2& v) { return inner(v, v); }

double sq_grad(const VectorField2& v) {
    const double n = seminorm_grad(v, 2.0);
    return n * n;
}

/// Trapezoid over snapshots with index >= first.
double weighted_integral(const std::vector<double>& t, const std::vector<double>& f, std::size_t first) {
    double acc = 0.0;
    for (std::size_t k = first + 1; k < t.size(); ++k) acc += 0.5 * (t[k] - t[k - 1]) * (f[k] + f[k - 1]);
    return acc;
}

void require_snapshots(const Trajectory& traj) {
    if (traj.states.size() < 3) throw Error(ErrorCode::TooFewSnapshots, "functionals need at least three states");
}

}  // namespace

WeightedEnergies weighted_energies(const Trajectory& traj, bool include_a3) {
    require_snapshots(traj);
    const std::vector<double> t = traj.times();
    const std::size_t m = t.size();
    std::size_t first = 0;
    while (first < m && !(t[first] > 0.0)) ++first;
    if (first >= m) first = m - 1;

    std::vector<const ScalarField*> ux;
    std::vector<const ScalarField*> uy;
    for (const State& s : traj.states) {
        ux.push_back(&s.u.x);
        uy.push_back(&s.u.y);
    }
    const std::vector<ScalarField> dux = time_derivative(t, ux);
    const std::vector<ScalarField> duy = time_derivative(t, uy);

    std::vector<double> rho_dudt(m), rho_udot(m), hess(m), gradp(m), grad_dudt(m), grad_udot(m);
    std::vector<VectorField2> udot;
    if (include_a3) udot.reserve(m);
    for (std::size_t k = 0; k < m; ++k) {
        const State& s = traj.states[k];
        const VectorField2 dudt(dux[k], duy[k]);
        VectorField2 ud(material(dux[k], s.u.x, s.u), material(duy[k], s.u.y, s.u));
        rho_dudt[k] = weighted_energy(s.rho, dudt);
        rho_udot[k] = weighted_energy(s.rho, ud);
        hess[k] = sq_l2(hessian_norms(s.u));
        gradp[k] = sq_l2(gradient(s.p));
        grad_dudt[k] = sq_grad(dudt);
        grad_udot[k] = sq_grad(ud);
        if (include_a3) udot.push_back(std::move(ud));
    }

    WeightedEnergies w;
    const auto& diag = traj.diagnostics;
    double sup_energy = 0.0;
    double sup_s_grad = 0.0;
    std::vector<double> dt_grad_t;
    std::vector<double> dt_grad;
    for (const StepDiagnostics& d : diag) {
        sup_energy = std::max(sup_energy, 2.0 * d.kinetic);
        sup_s_grad = std::max(sup_s_grad, d.t * d.grad_u_l2sq);
        dt_grad_t.push_back(d.t);
        dt_grad.push_back(d.grad_u_l2sq);
    }
    const double grad_integral = cumulative_trapezoid(dt_grad_t, dt_grad).back();
    w.a0 = sup_energy + grad_integral;
    w.components["a0.sup_rho_u2"] = sup_energy;
    w.components["a0.int_grad_u2"] = grad_integral;

    std::vector<double> four(m), s1(m), s2(m), s2_extra(m);
    double sup_s2 = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        four[k] = rho_dudt[k] + rho_udot[k] + hess[k] + gradp[k];
        s1[k] = t[k] * four[k];
        s2[k] = t[k] * t[k] * four[k];
        s2_extra[k] = t[k] * t[k] * (grad_dudt[k] + grad_udot[k]);
        sup_s2 = std::max(sup_s2, s2[k]);
    }
    auto weighted = [&](const std::vector<double>& term, int power) {
        std::vector<double> v(m);
        for (std::size_t k = 0; k < m; ++k) v[k] = std::pow(t[k], power) * term[k];
        return weighted_integral(t, v, first);
    };
    const double int_s1 = weighted_integral(t, s1, first);
    w.a1 = sup_s_grad + int_s1;
    w.components["a1.sup_s_grad_u2"] = sup_s_grad;
    w.components["a1.int_s_rho_dsu2"] = weighted(rho_dudt, 1);
    w.components["a1.int_s_rho_udot2"] = weighted(rho_udot, 1);
    w.components["a1.int_s_hess_u2"] = weighted(hess, 1);
    w.components["a1.int_s_grad_p2"] = weighted(gradp, 1);

    const double int_s2 = weighted_integral(t, s2_extra, first);
    w.a2 = sup_s2 + int_s2;
    w.components["a2.sup_s2_terms"] = sup_s2;
    w.components["a2.int_s2_grad_dsu2"] = weighted(grad_dudt, 2);
    w.components["a2.int_s2_grad_udot2"] = weighted(grad_udot, 2);

    if (include_a3) {
        std::vector<const ScalarField*> vx, vy, pp;
        for (std::size_t k = 0; k < m; ++k) {
            vx.push_back(&udot[k].x);
            vy.push_back(&udot[k].y);
            pp.push_back(&traj.states[k].p);
        }
        const std::vector<ScalarField> dvx = time_derivative(t, vx);
        const std::vector<ScalarField> dvy = time_derivative(t, vy);
        const std::vector<ScalarField> dp = time_derivative(t, pp);
        std::vector<double> hess_udot(m), grad_pdot(m), rho_uddot(m);
        double sup3 = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            const State& s = traj.states[k];
            const VectorField2 uddot(material(dvx[k], udot[k].x, s.u), material(dvy[k], udot[k].y, s.u));
            const ScalarField pdot = material(dp[k], s.p, s.u);
            hess_udot[k] = sq_l2(hessian_norms(udot[k]));
            grad_pdot[k] = sq_l2(gradient(pdot));
            rho_uddot[k] = weighted_energy(s.rho, uddot);
            sup3 = std::max(sup3, t[k] * t[k] * t[k] * grad_udot[k]);
        }
        std::vector<double> s3(m);
        for (std::size_t k = 0; k < m; ++k) s3[k] = t[k] * t[k] * t[k] * (hess_udot[k] + grad_pdot[k] + rho_uddot[k]);
        w.a3 = sup3 + weighted_integral(t, s3, first);
        w.components["a3.sup_s3_grad_udot2"] = sup3;
        w.components["a3.int_s3_hess_udot2"] = weighted(hess_udot, 3);
        w.components["a3.int_s3_grad_pdot2"] = weighted(grad_pdot, 3);
        w.components["a3.int_s3_rho_uddot2"] = weighted(rho_uddot, 3);
    }
    return w;
}

double norm_z_from(const WeightedEnergies& w) {
    return std::sqrt(std::max({w.a0, w.a1, w.a2}));
}

double norm_e(const Trajectory& traj) {
    require_snapshots(traj);
    double sup = 0.0;
    for (const StepDiagnostics& d : traj.diagnostics) sup = std::max(sup, d.u_l2sq);
    return sup + traj.diagnostics.back().dissipation_cum;
}

double norm_z(const Trajectory& traj) { return norm_z_from(weighted_energies(traj, false)); }

double k0(const Trajectory& traj) {
    require_snapshots(traj);
    std::vector<double> t;
    std::vector<double> f;
    for (const StepDiagnostics& d : traj.diagnostics) {
        t.push_back(d.t);
        f.push_back(d.t * d.grad_u_inf * d.grad_u_inf);
    }
    return cumulative_trapezoid(t, f).back();
}

ZENorms ze_norms(const Trajectory& traj) {
    return {norm_e(traj), norm_z(traj), k0(traj)};
}

DecayReport linfty_decay_check(const Trajectory& traj) {
    DecayReport r;
    for (const StepDiagnostics& d : traj.diagnostics) r.lhs = std::max(r.lhs, d.t * d.u_inf * d.u_inf);
    const double z = norm_z(traj);
    r.rhs = z * z;
    r.ratio = r.rhs > 0.0 ? r.lhs / r.rhs : 0.0;
    r.pass = std::isfinite(r.ratio);
    return r;
}

InequalityKind parse_inequality_kind(const std::string& name) {
    if (name == "ladyzhenskaya") return InequalityKind::Ladyzhenskaya;
    if (name == "agmon") return InequalityKind::Agmon;
    if (name == "interp_inf") return InequalityKind::InterpInf;
    throw Error(ErrorCode::BadParams, "unknown inequality '" + name + "'");
}

double inequality_ratio(const ScalarField& f, InequalityKind kind) {
    const double l2 = norm(f, 2.0);
    const double grad2 = seminorm_grad(f, 2.0);
    // A field is degenerate when its gradient vanishes relative to its size.
    const double scale = std::max(norm(f, kInf), 1e-300);
    if (!(grad2 > 1e-13 * scale * f.grid().length)) throw Error(ErrorCode::DegenerateField, "field is constant");
    switch (kind) {
        case InequalityKind::Ladyzhenskaya: return norm(f, 4.0) / std::sqrt(l2 * grad2);
        case InequalityKind::Agmon: {
            const ScalarField zero(f.grid());
            const double hess = norm(hessian_norms(VectorField2(f, zero)), 2.0);
            return norm(f, kInf) / std::sqrt(l2 * hess);
        }
        case InequalityKind::InterpInf: return norm(f, kInf) / std::sqrt(norm(f, 4.0) * seminorm_grad(f, 4.0));
    }
    return 0.0;
}

GronwallReport gronwall_check(const std::vector<double>& t, const std::vector<double>& f, double a,
                              const std::vector<double>& g) {
    const std::size_t m = t.size();
    if (f.size() != m || g.size() != m || m == 0) throw Error(ErrorCode::GridMismatch, "paths differ in length");
    for (std::size_t k = 1; k < m; ++k)
        if (!(t[k] > t[k - 1])) throw Error(ErrorCode::GridMismatch, "time grid must increase strictly");
    for (double v : g)
        if (!(v >= 0.0)) throw Error(ErrorCode::BadParams, "g must be nonnegative");

    GronwallReport r;
    std::vector<double> gf(m);
    for (std::size_t k = 0; k < m; ++k) gf[k] = g[k] * f[k];
    const std::vector<double> igf = cumulative_trapezoid(t, gf);
    const std::vector<double> ig = cumulative_trapezoid(t, g);
    r.premise_holds = true;
    r.bound_holds = true;
    double log_prod = 0.0;  // log prod (1 + x_j) / (1 - y_j)
    double sum = 0.0;       // sum (x_j + y_j)
    for (std::size_t k = 0; k < m; ++k) {
        if (k > 0) {
            const double d = t[k] - t[k - 1];
            const double x = 0.5 * d * g[k - 1];
            const double y = 0.5 * d * g[k];
            if (!(y < 1.0)) throw Error(ErrorCode::StepTooCoarse, "time step too coarse for the discrete bound");
            log_prod += std::log1p(x) - std::log1p(-y);
            sum += x + y;
        }
        // Exact discrete bound: a prod (1 + x_j) / (1 - y_j) = a exp(trapz g) (1 + slack).
        const double slack = std::expm1(log_prod - sum);
        const double premise = a + igf[k];
        if (f[k] > premise + 1e-12 * std::abs(premise)) r.premise_holds = false;
        const double base = a * std::exp(ig[k]);
        const double bound = base * (1.0 + slack) + 1e-12 * std::abs(base);
        if (f[k] > bound) r.bound_holds = false;
        if (base > 0.0) r.worst_ratio = std::max(r.worst_ratio, f[k] / base);
    }
    return r;
}

}  // namespace densiflow
