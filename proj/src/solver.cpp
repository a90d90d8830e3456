#include "densiflow/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "densiflow/error.hpp"

namespace densiflow {

void DensityBounds::validate() const {
    if (!(c0 > 0.0) || !(C0 >= c0) || !std::isfinite(C0))
        throw Error(ErrorCode::BadParams, "density bounds must satisfy 0 < c0 <= C0 < inf");
}

void SolverConfig::validate() const {
    if (!(nu > 0.0) || !std::isfinite(nu)) throw Error(ErrorCode::BadParams, "nu must be positive");
    if (dt.has_value() == cfl.has_value()) throw Error(ErrorCode::BadParams, "set exactly one of dt and cfl");
    if (dt && !(*dt > 0.0)) throw Error(ErrorCode::BadParams, "dt must be positive");
    if (cfl && !(*cfl > 0.0 && *cfl <= kMaxCourant)) throw Error(ErrorCode::BadParams, "cfl must lie in (0, 1]");
    if (!(T >= 0.0) || !std::isfinite(T)) throw Error(ErrorCode::BadParams, "T must be >= 0");
    if (snapshot_stride < 1) throw Error(ErrorCode::BadParams, "snapshot_stride must be >= 1");
    if (!(pressure_tol > 0.0 && pressure_tol <= 1e-6))
        throw Error(ErrorCode::BadParams, "pressure_tol must lie in (0, 1e-6]");
    if (!(div_tol > 0.0)) throw Error(ErrorCode::BadParams, "div_tol must be positive");
    if (max_cg_iters < 1) throw Error(ErrorCode::BadParams, "max_cg_iters must be >= 1");
    bounds.validate();
}

namespace {

ScalarField reciprocal(const ScalarField& rho) {
    ScalarField s(rho.grid());
    for (std::size_t k = 0; k < rho.size(); ++k) s[k] = 1.0 / rho[k];
    return s;
}

/// Spectral divergence of (a, b).
Spectrum spectral_divergence(const Spectrum& a, const Spectrum& b) {
    Spectrum d = derivative_x(a);
    const Spectrum e = derivative_y(b);
    for (std::size_t k = 0; k < d.coeffs.size(); ++k) d.coeffs[k] += e.coeffs[k];
    return d;
}

/// Keeps the dealiased band and drops the mean.
void restrict_band(Spectrum& s) {
    truncate(s);
    s(0, 0) = 0.0;
}

/// Tendency F(u, rho) = -T[(u.grad)u] + nu T[Delta u / rho] and velocity-gradient norms.
struct Tendency {
    Spectrum fx;
    Spectrum fy;
    double grad_l2sq = 0.0;
    double grad_inf = 0.0;
};

Tendency tendency(const VectorField2& u, const ScalarField& sigma, double nu) {
    const GridSpec& g = u.grid();
    const Spectrum ux = forward(u.x);
    const Spectrum uy = forward(u.y);
    const ScalarField dxux = inverse(derivative_x(ux));
    const ScalarField dyux = inverse(derivative_y(ux));
    const ScalarField dxuy = inverse(derivative_x(uy));
    const ScalarField dyuy = inverse(derivative_y(uy));
    Spectrum lx(g);
    Spectrum ly(g);
    for (int i = 0; i < g.n; ++i) {
        const double kx = g.kx(i);
        for (int j = 0; j < g.half(); ++j) {
            const double ky = g.ky(j);
            const double k2 = kx * kx + ky * ky;
            lx(i, j) = -k2 * ux(i, j);
            ly(i, j) = -k2 * uy(i, j);
        }
    }
    const ScalarField lapx = inverse(lx);
    const ScalarField lapy = inverse(ly);
    ScalarField fx(g);
    ScalarField fy(g);
    double l2 = 0.0;
    double inf2 = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double vx = u.x[k];
        const double vy = u.y[k];
        fx[k] = -(vx * dxux[k] + vy * dyux[k]) + nu * sigma[k] * lapx[k];
        fy[k] = -(vx * dxuy[k] + vy * dyuy[k]) + nu * sigma[k] * lapy[k];
        const double f2 = dxux[k] * dxux[k] + dyux[k] * dyux[k] + dxuy[k] * dxuy[k] + dyuy[k] * dyuy[k];
        l2 += f2;
        inf2 = std::max(inf2, f2);
    }
    Tendency t;
    t.fx = forward(fx);
    t.fy = forward(fy);
    truncate(t.fx);
    truncate(t.fy);
    const double h = g.spacing();
    t.grad_l2sq = l2 * h * h;
    t.grad_inf = std::sqrt(inf2);
    return t;
}

/// T[sigma grad phi] as two spectra.
void flux(const ScalarField& sigma, const Spectrum& phi, Spectrum& ax, Spectrum& ay) {
    ScalarField gx = inverse(derivative_x(phi));
    ScalarField gy = inverse(derivative_y(phi));
    for (std::size_t k = 0; k < gx.size(); ++k) {
        gx[k] *= sigma[k];
        gy[k] *= sigma[k];
    }
    forward_into(gx, ax);
    forward_into(gy, ay);
    truncate(ax);
    truncate(ay);
}

void precondition(const Spectrum& r, double sigma_mean, Spectrum& z) {
    const GridSpec& g = r.grid;
    if (z.grid != g) z = Spectrum(g);
    for (int i = 0; i < g.n; ++i) {
        const double kx = g.kx(i);
        for (int j = 0; j < g.half(); ++j) {
            const double ky = g.ky(j);
            const double k2 = kx * kx + ky * ky;
            z(i, j) = (k2 == 0.0 || !in_band(g, i, j)) ? Complex(0.0) : r(i, j) / (sigma_mean * k2);
        }
    }
}

double spectral_norm(const Spectrum& s) { return std::sqrt(spectral_dot(s, s)); }

}  // namespace

Spectrum apply_variable_poisson(const ScalarField& sigma, const Spectrum& x) {
    Spectrum ax(x.grid);
    Spectrum ay(x.grid);
    flux(sigma, x, ax, ay);
    Spectrum d = spectral_divergence(ax, ay);
    for (auto& c : d.coeffs) c = -c;
    return d;
}

PcgResult solve_variable_poisson(const ScalarField& sigma, const Spectrum& b_in, Spectrum& x, double tol,
                                 int max_iters) {
    const GridSpec& g = b_in.grid;
    require_same_grid(g, sigma.grid());
    Spectrum b = b_in;
    restrict_band(b);
    if (x.grid != g) x = Spectrum(g);
    restrict_band(x);
    PcgResult res;
    const double bnorm = spectral_norm(b);
    if (bnorm == 0.0) {
        std::fill(x.coeffs.begin(), x.coeffs.end(), Complex(0.0));
        return res;
    }
    const double sigma_mean = mean(sigma);
    Spectrum r = apply_variable_poisson(sigma, x);
    for (std::size_t k = 0; k < r.coeffs.size(); ++k) r.coeffs[k] = b.coeffs[k] - r.coeffs[k];
    res.relative_residual = spectral_norm(r) / bnorm;
    if (res.relative_residual <= tol) return res;
    Spectrum z(g);
    precondition(r, sigma_mean, z);
    Spectrum p = z;
    double rz = spectral_dot(r, z);
    while (true) {
        if (res.iterations >= max_iters) {
            throw Error(ErrorCode::PressureSolveStall, "no convergence after " + std::to_string(max_iters) +
                                                           " iterations, residual " +
                                                           std::to_string(res.relative_residual));
        }
        const Spectrum ap = apply_variable_poisson(sigma, p);
        const double pap = spectral_dot(p, ap);
        if (!(pap > 0.0)) throw Error(ErrorCode::PressureSolveStall, "operator lost positivity");
        const double alpha = rz / pap;
        for (std::size_t k = 0; k < x.coeffs.size(); ++k) {
            x.coeffs[k] += alpha * p.coeffs[k];
            r.coeffs[k] -= alpha * ap.coeffs[k];
        }
        ++res.iterations;
        res.relative_residual = spectral_norm(r) / bnorm;
        if (!std::isfinite(res.relative_residual)) throw Error(ErrorCode::PressureSolveStall, "residual diverged");
        if (res.relative_residual <= tol) break;
        precondition(r, sigma_mean, z);
        const double rz_new = spectral_dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t k = 0; k < p.coeffs.size(); ++k) p.coeffs[k] = z.coeffs[k] + beta * p.coeffs[k];
    }
    return res;
}

namespace {

/// Solves for the pressure consistent with a tendency; returns iterations.
int pressure_from_tendency(const ScalarField& sigma, const Tendency& f, Spectrum& p_hat, const SolverConfig& cfg) {
    Spectrum b = spectral_divergence(f.fx, f.fy);
    for (auto& c : b.coeffs) c = -c;
    return solve_variable_poisson(sigma, b, p_hat, cfg.pressure_tol, cfg.max_cg_iters).iterations;
}

/// k = F - T[sigma grad p] in spectral form.
void accel_spectra(const Tendency& f, const ScalarField& sigma, const Spectrum& p_hat, Spectrum& kx, Spectrum& ky) {
    Spectrum ax(p_hat.grid);
    Spectrum ay(p_hat.grid);
    flux(sigma, p_hat, ax, ay);
    kx = f.fx;
    ky = f.fy;
    for (std::size_t k = 0; k < kx.coeffs.size(); ++k) {
        kx.coeffs[k] -= ax.coeffs[k];
        ky.coeffs[k] -= ay.coeffs[k];
    }
}

/// Mass-restoring correction that keeps values inside [lo, hi].
void fix_mass(std::vector<double>& rho, double target_sum, double lo, double hi) {
    double sum = 0.0;
    for (double v : rho) sum += v;
    const double defect = target_sum - sum;
    if (defect == 0.0) return;
    double room = 0.0;
    if (defect > 0.0) {
        for (double v : rho) room += std::max(0.0, hi - v);
    } else {
        for (double v : rho) room += std::max(0.0, v - lo);
    }
    if (!(room > 0.0)) return;
    const double frac = std::min(1.0, std::abs(defect) / room);
    if (defect > 0.0) {
        for (double& v : rho) v += frac * std::max(0.0, hi - v);
    } else {
        for (double& v : rho) v -= frac * std::max(0.0, v - lo);
    }
}

void check_bounds(const ScalarField& rho, const DensityBounds& b) {
    const double lo = rho.min();
    const double hi = rho.max();
    if (lo < b.c0 - 1e-12 || hi > b.C0 + 1e-12) {
        throw Error(ErrorCode::BoundsBreach,
                    "density range [" + std::to_string(lo) + ", " + std::to_string(hi) + "] leaves the bounds");
    }
}

struct Advanced {
    State state;
    Tendency f;
    int cg_iters = 0;
    double div_inf = 0.0;
};

double max_speed(const VectorField2& u) { return norm(u, kInf); }

void check_step_size(const State& s, double dt, const SolverConfig& cfg) {
    const double h = s.rho.grid().spacing();
    const double courant = max_speed(s.u) * dt / h;
    const double diffusion = cfg.nu * dt / (s.rho.min() * h * h);
    if (courant > kMaxCourant * (1.0 + 1e-12))
        throw Error(ErrorCode::CFLViolation, "Courant number " + std::to_string(courant) + " exceeds 1");
    if (diffusion > kMaxDiffusionNumber * (1.0 + 1e-12)) {
        throw Error(ErrorCode::CFLViolation,
                    "diffusion number " + std::to_string(diffusion) + " exceeds " + std::to_string(kMaxDiffusionNumber));
    }
}

/// One step from a state whose tendency f and pressure are current.
Advanced advance(const State& s, const ScalarField& sigma, const Tendency& f, double dt, const SolverConfig& cfg) {
    const GridSpec& g = s.rho.grid();
    check_step_size(s, dt, cfg);

    Spectrum p_hat = forward(s.p);
    Spectrum k1x;
    Spectrum k1y;
    accel_spectra(f, sigma, p_hat, k1x, k1y);
    const ScalarField a1x = inverse(k1x);
    const ScalarField a1y = inverse(k1y);

    // Density: one RK4 backward characteristic with velocity u + theta k1.
    const SplineSet vel({&s.u.x, &s.u.y, &a1x, &a1y});
    std::vector<double> fx(g.size());
    std::vector<double> fy(g.size());
    const double h = g.spacing();
    const long long n = g.n;
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < n; ++i) {
        double v[4];
        auto velocity = [&](double theta, double x, double y, double& ox, double& oy) {
            vel.eval(make_stencil(g, x, y), v);
            ox = v[0] + theta * v[2];
            oy = v[1] + theta * v[3];
        };
        for (int j = 0; j < g.n; ++j) {
            const double x = i * h;
            const double y = j * h;
            double q1x, q1y, q2x, q2y, q3x, q3y, q4x, q4y;
            velocity(dt, x, y, q1x, q1y);
            velocity(0.5 * dt, x - 0.5 * dt * q1x, y - 0.5 * dt * q1y, q2x, q2y);
            velocity(0.5 * dt, x - 0.5 * dt * q2x, y - 0.5 * dt * q2y, q3x, q3y);
            velocity(0.0, x - dt * q3x, y - dt * q3y, q4x, q4y);
            const std::size_t k = static_cast<std::size_t>(i) * g.n + j;
            fx[k] = x - dt / 6.0 * (q1x + 2.0 * q2x + 2.0 * q3x + q4x);
            fy[k] = y - dt / 6.0 * (q1y + 2.0 * q2y + 2.0 * q3y + q4y);
        }
    }
    std::vector<double> rho_new = sample_monotone(s.rho, fx, fy, cfg.density_interp);
    double target = 0.0;
    for (double v : s.rho.values()) target += v;
    fix_mass(rho_new, target, s.rho.min(), s.rho.max());

    Advanced out;
    out.state.t = s.t + dt;
    out.state.rho = ScalarField(g, std::move(rho_new));
    check_bounds(out.state.rho, cfg.bounds);
    const ScalarField sigma_new = reciprocal(out.state.rho);

    // Momentum: Heun predictor/corrector followed by a projection.
    VectorField2 u1 = s.u;
    u1.x.axpy(dt, a1x);
    u1.y.axpy(dt, a1y);
    const Tendency f1 = tendency(u1, sigma_new, cfg.nu);
    Spectrum usx = forward(s.u.x);
    Spectrum usy = forward(s.u.y);
    for (std::size_t k = 0; k < usx.coeffs.size(); ++k) {
        usx.coeffs[k] += 0.5 * dt * (k1x.coeffs[k] + f1.fx.coeffs[k]);
        usy.coeffs[k] += 0.5 * dt * (k1y.coeffs[k] + f1.fy.coeffs[k]);
    }
    Spectrum b = spectral_divergence(usx, usy);
    for (auto& c : b.coeffs) c *= -1.0 / dt;
    // The corrector carries half of the old pressure gradient.
    Spectrum phi = p_hat;
    for (auto& c : phi.coeffs) c *= 0.5;
    const int it_proj = solve_variable_poisson(sigma_new, b, phi, cfg.pressure_tol, cfg.max_cg_iters).iterations;
    Spectrum cx(g);
    Spectrum cy(g);
    flux(sigma_new, phi, cx, cy);
    for (std::size_t k = 0; k < usx.coeffs.size(); ++k) {
        usx.coeffs[k] -= dt * cx.coeffs[k];
        usy.coeffs[k] -= dt * cy.coeffs[k];
    }
    out.div_inf = norm(inverse(spectral_divergence(usx, usy)), kInf);
    if (out.div_inf > cfg.div_tol) {
        throw Error(ErrorCode::PressureSolveStall,
                    "projected divergence " + std::to_string(out.div_inf) + " exceeds div_tol");
    }
    out.state.u = VectorField2(inverse(usx), inverse(usy));

    // Pressure consistent with the new state; warm start from the old one.
    out.f = tendency(out.state.u, sigma_new, cfg.nu);
    const int it_p = pressure_from_tendency(sigma_new, out.f, p_hat, cfg);
    out.state.p = inverse(p_hat);
    out.cg_iters = std::max(it_proj, it_p);
    return out;
}

StepDiagnostics diagnose(const State& s, const Tendency& f, const SolverConfig& cfg) {
    StepDiagnostics d;
    d.t = s.t;
    d.kinetic = 0.5 * weighted_energy(s.rho, s.u);
    d.grad_u_inf = f.grad_inf;
    d.grad_u_l2sq = f.grad_l2sq;
    d.u_inf = max_speed(s.u);
    d.u_l2sq = inner(s.u, s.u);
    d.rho_min = s.rho.min();
    d.rho_max = s.rho.max();
    d.mass = integral(s.rho);
    d.div_inf = norm(divergence(s.u), kInf);
    (void)cfg;
    return d;
}

/// Brings a state's pressure in line with its velocity and density.
int make_consistent(State& s, const ScalarField& sigma, Tendency& f, const SolverConfig& cfg) {
    f = tendency(s.u, sigma, cfg.nu);
    Spectrum p_hat = (s.p.size() == s.rho.size()) ? forward(s.p) : Spectrum(s.rho.grid());
    const int it = pressure_from_tendency(sigma, f, p_hat, cfg);
    s.p = inverse(p_hat);
    return it;
}

}  // namespace

ScalarField consistent_pressure(const ScalarField& rho, const VectorField2& u, const SolverConfig& cfg,
                                const ScalarField* guess) {
    State s;
    s.rho = rho;
    s.u = u;
    if (guess != nullptr) s.p = *guess;
    Tendency f;
    make_consistent(s, reciprocal(rho), f, cfg);
    return s.p;
}

VectorField2 acceleration(const State& s, const SolverConfig& cfg) {
    const ScalarField sigma = reciprocal(s.rho);
    const Tendency f = tendency(s.u, sigma, cfg.nu);
    Spectrum kx;
    Spectrum ky;
    accel_spectra(f, sigma, forward(s.p), kx, ky);
    return {inverse(kx), inverse(ky)};
}

double stable_dt(const State& s, const SolverConfig& cfg) {
    if (cfg.dt) return *cfg.dt;
    const double h = s.rho.grid().spacing();
    const double speed = max_speed(s.u);
    const double diff = kMaxDiffusionNumber * s.rho.min() * h * h / cfg.nu;
    const double adv = speed > 0.0 ? *cfg.cfl * h / speed : diff;
    return std::min(adv, diff);
}

State step(const State& state, double dt, const SolverConfig& cfg, int* cg_iters) {
    cfg.validate();
    if (!(dt > 0.0)) throw Error(ErrorCode::BadParams, "dt must be positive");
    require_same_grid(state.rho.grid(), state.u.grid());
    check_bounds(state.rho, cfg.bounds);
    State s = state;
    const ScalarField sigma = reciprocal(s.rho);
    Tendency f;
    const int it0 = make_consistent(s, sigma, f, cfg);
    Advanced a = advance(s, sigma, f, dt, cfg);
    if (cg_iters != nullptr) *cg_iters = std::max(it0, a.cg_iters);
    return std::move(a.state);
}

Trajectory run(const ScalarField& rho0, const VectorField2& u0, const SolverConfig& cfg) {
    return run(rho0, u0, cfg, StepObserver{});
}

Trajectory run(const ScalarField& rho0, const VectorField2& u0, const SolverConfig& cfg, const StepObserver& obs) {
    cfg.validate();
    require_same_grid(rho0.grid(), u0.grid());
    if (!rho0.all_finite() || !u0.x.all_finite() || !u0.y.all_finite())
        throw Error(ErrorCode::NonFinite, "initial data");
    check_bounds(rho0, cfg.bounds);

    Trajectory traj;
    traj.config = cfg;
    State s;
    s.t = 0.0;
    s.rho = rho0;
    s.u = u0;
    s.p = ScalarField(rho0.grid());
    ScalarField sigma = reciprocal(s.rho);
    Tendency f;
    const int it0 = make_consistent(s, sigma, f, cfg);
    StepDiagnostics d0 = diagnose(s, f, cfg);
    d0.cg_iters = it0;
    traj.diagnostics.push_back(d0);
    traj.states.push_back(s);

    const double T = cfg.T;
    const double t_eps = 1e-12 * std::max(1.0, T);
    long long count = 0;
    while (s.t < T - t_eps) {
        double dt = stable_dt(s, cfg);
        double t_next = 0.0;
        if (cfg.dt) {
            t_next = std::min(T, static_cast<double>(count + 1) * *cfg.dt);
            if (T - t_next < t_eps) t_next = T;
            dt = t_next - s.t;
        } else {
            t_next = s.t + dt;
            if (t_next > T - t_eps) t_next = T;
            dt = t_next - s.t;
        }
        Advanced a = advance(s, sigma, f, dt, cfg);
        a.state.t = t_next;
        ++count;
        const StepDiagnostics& prev = traj.diagnostics.back();
        StepDiagnostics d = diagnose(a.state, a.f, cfg);
        d.cg_iters = a.cg_iters;
        d.div_inf = a.div_inf;
        d.dissipation_cum = prev.dissipation_cum + 0.5 * dt * cfg.nu * (prev.grad_u_l2sq + d.grad_u_l2sq);
        traj.diagnostics.push_back(d);
        s = std::move(a.state);
        f = std::move(a.f);
        sigma = reciprocal(s.rho);
        const bool last = !(s.t < T - t_eps);
        if (count % cfg.snapshot_stride == 0 || last) traj.states.push_back(s);
        if (obs) obs(s, d);
    }
    return traj;
}

std::vector<double> Trajectory::times() const {
    std::vector<double> t;
    t.reserve(states.size());
    for (const State& s : states) t.push_back(s.t);
    return t;
}

VelocityTrack Trajectory::velocity_track() const {
    std::vector<VectorField2> u;
    u.reserve(states.size());
    for (const State& s : states) u.push_back(s.u);
    return {times(), std::move(u)};
}

ScalarTrack Trajectory::density_track() const {
    std::vector<ScalarField> r;
    r.reserve(states.size());
    for (const State& s : states) r.push_back(s.rho);
    return {times(), std::move(r)};
}

}  // namespace densiflow
