#include <algorithm>
#include <cmath>

#include "densiflow/error.hpp"
#include "densiflow/solver.hpp"

namespace densiflow {
namespace {

/// Composite Simpson on uniform grids with an even interval count, else trapezoid.
double time_quadrature(const std::vector<double>& t, const std::vector<double>& f) {
    const std::size_t m = t.size();
    if (m < 2) return 0.0;
    const std::size_t intervals = m - 1;
    const double h0 = t[1] - t[0];
    bool uniform = true;
    for (std::size_t k = 1; k < m; ++k)
        if (std::abs((t[k] - t[k - 1]) - h0) > 1e-9 * std::abs(h0)) uniform = false;
    if (uniform && intervals % 2 == 0) {
        double acc = f.front() + f.back();
        for (std::size_t k = 1; k < intervals; ++k) acc += (k % 2 == 1 ? 4.0 : 2.0) * f[k];
        return acc * h0 / 3.0;
    }
    double acc = 0.0;
    for (std::size_t k = 1; k < m; ++k) acc += 0.5 * (t[k] - t[k - 1]) * (f[k] + f[k - 1]);
    return acc;
}

double grad_contraction(const VectorField2& u, const VectorField2& psi) {
    const VectorField2 gux = gradient(u.x);
    const VectorField2 guy = gradient(u.y);
    const VectorField2 gpx = gradient(psi.x);
    const VectorField2 gpy = gradient(psi.y);
    return inner(gux, gpx) + inner(guy, gpy);
}

}  // namespace

double residual_weak_form(const Trajectory& traj, const TestFunction& phi, WeakForm which) {
    if (traj.states.size() < 2) throw Error(ErrorCode::TooFewSnapshots, "weak form needs two stored states");
    const GridSpec& g = traj.grid();
    const std::vector<double> t = traj.times();
    std::vector<double> integrand(t.size());
    const State& first = traj.states.front();
    const State& last = traj.states.back();

    switch (which) {
        case WeakForm::Mass:
        case WeakForm::Incompressibility: {
            require_same_grid(g, phi.psi.grid());
            const VectorField2 gpsi = gradient(phi.psi);
            for (std::size_t k = 0; k < t.size(); ++k) {
                const State& s = traj.states[k];
                if (which == WeakForm::Mass) {
                    const VectorField2 m(pointwise(s.rho, s.u.x), pointwise(s.rho, s.u.y));
                    integrand[k] = phi.chi_dot(s.t) * inner(s.rho, phi.psi) + phi.chi(s.t) * inner(m, gpsi);
                } else {
                    integrand[k] = phi.chi(s.t) * inner(s.u, gpsi);
                }
            }
            const double lhs = time_quadrature(t, integrand);
            if (which == WeakForm::Incompressibility) return std::abs(lhs);
            const double rhs = phi.chi(last.t) * inner(last.rho, phi.psi) - phi.chi(first.t) * inner(first.rho, phi.psi);
            return std::abs(lhs - rhs);
        }
        case WeakForm::Momentum: {
            require_same_grid(g, phi.psi_vec.grid());
            const double div = norm(divergence(phi.psi_vec), kInf);
            if (div > 1e-10)
                throw Error(ErrorCode::BadTestFunction, "momentum test function has divergence " + std::to_string(div));
            const VectorField2 gpx = gradient(phi.psi_vec.x);
            const VectorField2 gpy = gradient(phi.psi_vec.y);
            const double nu = traj.config.nu;
            auto momentum = [&](const State& s) {
                return VectorField2(pointwise(s.rho, s.u.x), pointwise(s.rho, s.u.y));
            };
            for (std::size_t k = 0; k < t.size(); ++k) {
                const State& s = traj.states[k];
                const VectorField2 m = momentum(s);
                // rho u (x) u : grad psi = rho u_i u_j d_j psi_i
                const VectorField2 conv_x(pointwise(m.x, s.u.x), pointwise(m.x, s.u.y));
                const VectorField2 conv_y(pointwise(m.y, s.u.x), pointwise(m.y, s.u.y));
                const double conv = inner(conv_x, gpx) + inner(conv_y, gpy);
                integrand[k] = phi.chi_dot(s.t) * inner(m, phi.psi_vec) + phi.chi(s.t) * conv -
                               nu * phi.chi(s.t) * grad_contraction(s.u, phi.psi_vec);
            }
            const double lhs = time_quadrature(t, integrand);
            const double rhs = phi.chi(last.t) * inner(momentum(last), phi.psi_vec) -
                               phi.chi(first.t) * inner(momentum(first), phi.psi_vec);
            return std::abs(lhs - rhs);
        }
    }
    return 0.0;
}

EnergyReport energy_report(const Trajectory& traj) {
    EnergyReport rep;
    if (traj.diagnostics.empty()) return rep;
    rep.rhs = traj.diagnostics.front().kinetic;
    for (const StepDiagnostics& d : traj.diagnostics) {
        rep.t.push_back(d.t);
        const double lhs = d.kinetic + d.dissipation_cum;
        rep.lhs.push_back(lhs);
        rep.gap.push_back(lhs - rep.rhs);
    }
    double worst = 0.0;
    for (double gap : rep.gap) worst = std::max(worst, std::abs(gap));
    rep.max_rel_gap = rep.rhs > 0.0 ? worst / rep.rhs : worst;
    return rep;
}

}  // namespace densiflow
