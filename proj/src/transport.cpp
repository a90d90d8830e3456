#include "densiflow/transport.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "densiflow/error.hpp"

namespace densiflow {
namespace {

void validate_times(const std::vector<double>& times, std::size_t count) {
    if (times.size() < 2) throw Error(ErrorCode::TooFewSnapshots, "a track needs at least two instants");
    if (times.size() != count) throw Error(ErrorCode::GridMismatch, "times and snapshots differ in count");
    for (std::size_t k = 1; k < times.size(); ++k)
        if (!(times[k] > times[k - 1])) throw Error(ErrorCode::BadParams, "track times must increase strictly");
}

void find_segment(const std::vector<double>& times, double t, std::size_t& k, double& w) noexcept {
    if (t <= times.front()) {
        k = 0;
        w = 0.0;
        return;
    }
    if (t >= times.back()) {
        k = times.size() - 2;
        w = 1.0;
        return;
    }
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    k = static_cast<std::size_t>(it - times.begin()) - 1;
    w = (t - times[k]) / (times[k + 1] - times[k]);
}

/// Time tolerance for range checks, relative to the track span.
double range_slack(const std::vector<double>& times) { return 1e-12 * (1.0 + std::abs(times.back())); }

inline double op_norm2(double a, double b, double c, double d) noexcept {
    // Largest singular value of [[a, b], [c, d]].
    const double f2 = a * a + b * b + c * c + d * d;
    const double det = a * d - b * c;
    const double disc = std::max(0.0, f2 * f2 - 4.0 * det * det);
    return std::sqrt(0.5 * (f2 + std::sqrt(disc)));
}

}  // namespace

VelocityTrack::VelocityTrack(std::vector<double> times, std::vector<VectorField2> snapshots)
    : times_(std::move(times)), snapshots_(std::move(snapshots)) {
    validate_times(times_, snapshots_.size());
    grid_ = snapshots_.front().grid();
    gradients_.reserve(snapshots_.size());
    splines_.reserve(snapshots_.size());
    for (const VectorField2& v : snapshots_) {
        require_same_grid(grid_, v.grid());
        if (!v.x.all_finite() || !v.y.all_finite()) throw Error(ErrorCode::NonFinite, "velocity snapshot");
        VectorField2 gx = gradient(v.x);
        VectorField2 gy = gradient(v.y);
        gradients_.push_back({std::move(gx.x), std::move(gx.y), std::move(gy.x), std::move(gy.y)});
        const auto& g = gradients_.back();
        splines_.emplace_back(std::vector<const ScalarField*>{&v.x, &v.y, &g[0], &g[1], &g[2], &g[3]});
    }
}

bool VelocityTrack::contains(double t) const noexcept {
    const double eps = range_slack(times_);
    return t >= times_.front() - eps && t <= times_.back() + eps;
}

void VelocityTrack::segment(double t, std::size_t& k, double& w) const noexcept { find_segment(times_, t, k, w); }

void VelocityTrack::eval(double t, double x, double y, double* u, double* du) const noexcept {
    std::size_t k = 0;
    double w = 0.0;
    segment(t, k, w);
    const SplineStencil st = make_stencil(grid_, x, y);
    double a[6];
    double b[6];
    // Members are u, v, then the four gradient entries.
    const std::size_t members = du != nullptr ? 6 : 2;
    splines_[k].eval(st, a, members);
    if (w > 0.0) {
        splines_[k + 1].eval(st, b, members);
        for (std::size_t c = 0; c < members; ++c) a[c] = (1.0 - w) * a[c] + w * b[c];
    }
    u[0] = a[0];
    u[1] = a[1];
    if (du != nullptr)
        for (int c = 0; c < 4; ++c) du[c] = a[2 + c];
}

VectorField2 VelocityTrack::field_at(double t) const {
    std::size_t k = 0;
    double w = 0.0;
    segment(t, k, w);
    VectorField2 out = snapshots_[k];
    if (w > 0.0) {
        out *= (1.0 - w);
        out.axpy(w, snapshots_[k + 1]);
    }
    return out;
}

double VelocityTrack::u_inf(double t) const { return norm(field_at(t), kInf); }

double VelocityTrack::grad_inf(double t) const {
    std::size_t k = 0;
    double w = 0.0;
    segment(t, k, w);
    const auto& g0 = gradients_[k];
    const auto& g1 = gradients_[std::min(k + 1, gradients_.size() - 1)];
    double m = 0.0;
    for (std::size_t p = 0; p < grid_.size(); ++p) {
        double s = 0.0;
        for (int c = 0; c < 4; ++c) {
            const double v = (1.0 - w) * g0[c][p] + w * g1[c][p];
            s += v * v;
        }
        m = std::max(m, s);
    }
    return std::sqrt(m);
}

double VelocityTrack::integrate(const std::function<double(double)>& g, double a, double b, int refine) const {
    const double sign = b >= a ? 1.0 : -1.0;
    const double lo = std::min(a, b);
    const double hi = std::max(a, b);
    if (hi == lo) return 0.0;
    std::vector<double> nodes{lo};
    for (double t : times_)
        if (t > lo && t < hi) nodes.push_back(t);
    nodes.push_back(hi);
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
        const double t0 = nodes[k];
        const double dt = (nodes[k + 1] - t0) / refine;
        double prev = g(t0);
        for (int r = 1; r <= refine; ++r) {
            const double cur = g(r == refine ? nodes[k + 1] : t0 + r * dt);
            acc += 0.5 * dt * (prev + cur);
            prev = cur;
        }
    }
    return sign * acc;
}

ScalarTrack::ScalarTrack(std::vector<double> times, std::vector<ScalarField> snapshots)
    : times_(std::move(times)), snapshots_(std::move(snapshots)) {
    validate_times(times_, snapshots_.size());
    grid_ = snapshots_.front().grid();
    splines_.reserve(snapshots_.size());
    for (const ScalarField& f : snapshots_) {
        require_same_grid(grid_, f.grid());
        splines_.emplace_back(std::vector<const ScalarField*>{&f});
    }
}

bool ScalarTrack::contains(double t) const noexcept {
    const double eps = range_slack(times_);
    return t >= times_.front() - eps && t <= times_.back() + eps;
}

double ScalarTrack::eval(double t, double x, double y) const noexcept {
    std::size_t k = 0;
    double w = 0.0;
    find_segment(times_, t, k, w);
    const SplineStencil st = make_stencil(grid_, x, y);
    double v = splines_[k].eval_member(st, 0);
    if (w > 0.0) v = (1.0 - w) * v + w * splines_[k + 1].eval_member(st, 0);
    return v;
}

ScalarField ScalarTrack::field_at(double t) const {
    std::size_t k = 0;
    double w = 0.0;
    find_segment(times_, t, k, w);
    ScalarField out = snapshots_[k];
    if (w > 0.0) {
        out *= (1.0 - w);
        out.axpy(w, snapshots_[k + 1]);
    }
    return out;
}

double FlowMap::dx_norm_inf() const {
    double m = 0.0;
    for (std::size_t p = 0; p < jacobian.size(); ++p)
        m = std::max(m, op_norm2(differential[0][p], differential[1][p], differential[2][p], differential[3][p]));
    return m;
}

double FlowMap::jacobian_defect() const {
    double m = 0.0;
    for (double j : jacobian.values()) m = std::max(m, std::abs(j - 1.0));
    return m;
}

namespace {

void require_in_track(const VelocityTrack& u, double t, const char* what) {
    if (!u.contains(t)) {
        throw Error(ErrorCode::OutOfRange, std::string(what) + " = " + std::to_string(t) + " outside [" +
                                               std::to_string(u.t_min()) + ", " + std::to_string(u.t_max()) + "]");
    }
}

int step_count(double from, double to, double substep) {
    if (!(substep > 0.0)) throw Error(ErrorCode::BadParams, "substep must be positive");
    const double span = std::abs(to - from);
    if (span == 0.0) return 0;
    return std::max(1, static_cast<int>(std::ceil(span / substep - 1e-9)));
}

/// RK4 for one point; state is (x, y) and optionally the 2x2 differential.
inline void rk4_point(const VelocityTrack& u, double t0, double dt, int steps, double& x, double& y,
                      std::array<double, 4>* dx) {
    double ua[2];
    double da[4];
    for (int s = 0; s < steps; ++s) {
        const double t = t0 + s * dt;
        double kx[4];
        double ky[4];
        double kd[4][4];
        double px = x;
        double py = y;
        std::array<double, 4> m{};
        if (dx != nullptr) m = *dx;
        const double cs[4] = {0.0, 0.5, 0.5, 1.0};
        for (int stage = 0; stage < 4; ++stage) {
            double sx = x;
            double sy = y;
            std::array<double, 4> sm = m;
            if (stage > 0) {
                sx = px + cs[stage] * dt * kx[stage - 1];
                sy = py + cs[stage] * dt * ky[stage - 1];
                if (dx != nullptr)
                    for (int c = 0; c < 4; ++c) sm[c] = m[c] + cs[stage] * dt * kd[stage - 1][c];
            }
            u.eval(t + cs[stage] * dt, sx, sy, ua, dx != nullptr ? da : nullptr);
            kx[stage] = ua[0];
            ky[stage] = ua[1];
            if (dx != nullptr) {
                // d/dz DX = Du DX
                kd[stage][0] = da[0] * sm[0] + da[1] * sm[2];
                kd[stage][1] = da[0] * sm[1] + da[1] * sm[3];
                kd[stage][2] = da[2] * sm[0] + da[3] * sm[2];
                kd[stage][3] = da[2] * sm[1] + da[3] * sm[3];
            }
        }
        x = px + dt / 6.0 * (kx[0] + 2.0 * kx[1] + 2.0 * kx[2] + kx[3]);
        y = py + dt / 6.0 * (ky[0] + 2.0 * ky[1] + 2.0 * ky[2] + ky[3]);
        if (dx != nullptr)
            for (int c = 0; c < 4; ++c)
                (*dx)[c] = m[c] + dt / 6.0 * (kd[0][c] + 2.0 * kd[1][c] + 2.0 * kd[2][c] + kd[3][c]);
    }
}

void check_finite_points(const PointFlow& pf) {
    for (std::size_t k = 0; k < pf.x.size(); ++k)
        if (!std::isfinite(pf.x[k]) || !std::isfinite(pf.y[k]))
            throw Error(ErrorCode::NonFinite, "characteristic diverged");
}

/// Advances pf in place from `from` to `to`.
void advance_points(const VelocityTrack& u, PointFlow& pf, double from, double to, double substep) {
    const int steps = step_count(from, to, substep);
    if (steps == 0) return;
    const double dt = (to - from) / steps;
    const bool track_dx = !pf.dx.empty();
    const long long count = static_cast<long long>(pf.x.size());
#pragma omp parallel for schedule(static)
    for (long long k = 0; k < count; ++k)
        rk4_point(u, from, dt, steps, pf.x[k], pf.y[k], track_dx ? &pf.dx[k] : nullptr);
    check_finite_points(pf);
}

PointFlow grid_points(const GridSpec& g) {
    PointFlow pf;
    pf.x.resize(g.size());
    pf.y.resize(g.size());
    const double h = g.spacing();
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) {
            pf.x[static_cast<std::size_t>(i) * g.n + j] = i * h;
            pf.y[static_cast<std::size_t>(i) * g.n + j] = j * h;
        }
    pf.dx.assign(g.size(), {1.0, 0.0, 0.0, 1.0});
    return pf;
}

FlowMap to_flow_map(const GridSpec& g, const PointFlow& pf, double s, double t) {
    FlowMap fm;
    fm.s = s;
    fm.t = t;
    fm.displacement = VectorField2(g);
    for (auto& d : fm.differential) d = ScalarField(g);
    fm.jacobian = ScalarField(g);
    const double h = g.spacing();
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) {
            const std::size_t p = static_cast<std::size_t>(i) * g.n + j;
            fm.displacement.x[p] = pf.x[p] - i * h;
            fm.displacement.y[p] = pf.y[p] - j * h;
            const auto& m = pf.dx[p];
            for (int c = 0; c < 4; ++c) fm.differential[c][p] = m[c];
            fm.jacobian[p] = m[0] * m[3] - m[1] * m[2];
        }
    return fm;
}

}  // namespace

PointFlow trace_points(const VelocityTrack& u, std::vector<double> x0, std::vector<double> y0, double from,
                       double to, double substep, bool with_differential) {
    require_in_track(u, from, "start time");
    require_in_track(u, to, "end time");
    if (x0.size() != y0.size()) throw Error(ErrorCode::GridMismatch, "coordinate arrays differ in length");
    PointFlow pf;
    pf.x = std::move(x0);
    pf.y = std::move(y0);
    if (with_differential) pf.dx.assign(pf.x.size(), {1.0, 0.0, 0.0, 1.0});
    advance_points(u, pf, from, to, substep);
    return pf;
}

FlowMap advance_flow(const VelocityTrack& u, double s, double t, double substep) {
    require_in_track(u, s, "s");
    require_in_track(u, t, "t");
    PointFlow pf = grid_points(u.grid());
    advance_points(u, pf, s, t, substep);
    return to_flow_map(u.grid(), pf, s, t);
}

std::vector<FlowMap> advance_flow_multi(const VelocityTrack& u, double s, const std::vector<double>& targets,
                                        double substep) {
    require_in_track(u, s, "s");
    for (double t : targets) require_in_track(u, t, "target");
    std::vector<FlowMap> out(targets.size());
    std::vector<std::size_t> order(targets.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (int side : {+1, -1}) {
        std::vector<std::size_t> idx;
        for (std::size_t k : order)
            if ((side > 0 && targets[k] >= s) || (side < 0 && targets[k] < s)) idx.push_back(k);
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return side > 0 ? targets[a] < targets[b] : targets[a] > targets[b];
        });
        PointFlow pf = grid_points(u.grid());
        double cur = s;
        for (std::size_t k : idx) {
            advance_points(u, pf, cur, targets[k], substep);
            cur = targets[k];
            out[k] = to_flow_map(u.grid(), pf, s, cur);
        }
    }
    return out;
}

CheckResult make_check(double lhs, double rhs, double rel_tol) {
    CheckResult r;
    r.lhs = lhs;
    r.rhs = rhs;
    r.margin = (rhs - lhs) / std::max(std::abs(rhs), 1e-300);
    r.pass = lhs <= rhs * (1.0 + rel_tol) || lhs <= rhs;
    return r;
}

CheckResult dx_bound_check(const FlowMap& flow, const VelocityTrack& u, double rel_tol) {
    const double lhs = flow.dx_norm_inf();
    const double integral_grad = std::abs(u.integrate([&](double z) { return u.grad_inf(z); }, flow.s, flow.t));
    return make_check(lhs, std::exp(integral_grad), rel_tol);
}

CheckResult log_kernel_flow_check(const FlowMap& flow, double z_norm, double rel_tol) {
    if (!(flow.s > 0.0) || !(flow.t > 0.0))
        throw Error(ErrorCode::NonPositiveTimes, "log-kernel check needs strictly positive times");
    const double lhs = flow.dx_norm_inf();
    const double rhs = std::exp(z_norm * std::sqrt(std::abs(std::log(flow.t / flow.s))));
    return make_check(lhs, rhs, rel_tol);
}

ScalarField transport_density(const ScalarField& rho_at_tau, const VelocityTrack& u, const ScalarTrack* f,
                              double tau, double s, const TransportOptions& opts) {
    require_in_track(u, tau, "tau");
    require_in_track(u, s, "s");
    require_same_grid(rho_at_tau.grid(), u.grid());
    if (!rho_at_tau.all_finite()) throw Error(ErrorCode::NonFinite, "density");
    if (f != nullptr) {
        require_same_grid(f->grid(), u.grid());
        if (!f->contains(tau) || !f->contains(s)) throw Error(ErrorCode::OutOfRange, "source track range");
    }
    const GridSpec& g = u.grid();
    PointFlow pf = grid_points(g);
    pf.dx.clear();
    std::vector<double> source(g.size(), 0.0);
    const int steps = step_count(s, tau, opts.substep);
    if (steps > 0) {
        const double dt = (tau - s) / steps;
        const long long count = static_cast<long long>(g.size());
#pragma omp parallel for schedule(static)
        for (long long k = 0; k < count; ++k) {
            double x = pf.x[k];
            double y = pf.y[k];
            double acc = 0.0;
            double ua[2];
            for (int st = 0; st < steps; ++st) {
                const double t = s + st * dt;
                // RK4 on (X, q) with dq/dz = f(z, X); q integrates the source backward.
                u.eval(t, x, y, ua, nullptr);
                const double k1x = ua[0], k1y = ua[1];
                const double q1 = f ? f->eval(t, x, y) : 0.0;
                const double x2 = x + 0.5 * dt * k1x, y2 = y + 0.5 * dt * k1y;
                u.eval(t + 0.5 * dt, x2, y2, ua, nullptr);
                const double k2x = ua[0], k2y = ua[1];
                const double q2 = f ? f->eval(t + 0.5 * dt, x2, y2) : 0.0;
                const double x3 = x + 0.5 * dt * k2x, y3 = y + 0.5 * dt * k2y;
                u.eval(t + 0.5 * dt, x3, y3, ua, nullptr);
                const double k3x = ua[0], k3y = ua[1];
                const double q3 = f ? f->eval(t + 0.5 * dt, x3, y3) : 0.0;
                const double x4 = x + dt * k3x, y4 = y + dt * k3y;
                u.eval(t + dt, x4, y4, ua, nullptr);
                const double k4x = ua[0], k4y = ua[1];
                const double q4 = f ? f->eval(t + dt, x4, y4) : 0.0;
                x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
                y += dt / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
                acc += dt / 6.0 * (q1 + 2.0 * q2 + 2.0 * q3 + q4);
            }
            pf.x[k] = x;
            pf.y[k] = y;
            // The integral runs from s down to tau, so flip its sign.
            source[k] = -acc;
        }
        check_finite_points(pf);
    }
    std::vector<double> values = sample_monotone(rho_at_tau, pf.x, pf.y, opts.interp);
    for (std::size_t k = 0; k < values.size(); ++k) values[k] += source[k];
    return ScalarField(g, std::move(values));
}

Beta Beta::identity() { return {"id", [](double r) { return r; }}; }

Beta Beta::square() { return {"r^2", [](double r) { return r * r; }}; }

Beta Beta::reciprocal() {
    return {"1/r", [](double r) { return 1.0 / r; }, std::numeric_limits<double>::min(),
            std::numeric_limits<double>::infinity()};
}

double renormalization_residual(const ScalarTrack& rho, const VelocityTrack& u, const Beta& beta,
                                const ScalarField& phi, double t) {
    require_same_grid(rho.grid(), u.grid());
    require_same_grid(rho.grid(), phi.grid());
    const double t0 = rho.times().front();
    if (!rho.contains(t) || !u.contains(t) || !u.contains(t0))
        throw Error(ErrorCode::OutOfRange, "residual time outside the tracks");
    const VectorField2 grad_phi = gradient(phi);

    auto beta_field = [&](const ScalarField& r) {
        ScalarField out(r.grid());
        for (std::size_t k = 0; k < r.size(); ++k) {
            const double v = r[k];
            if (!(v >= beta.lo && v <= beta.hi))
                throw Error(ErrorCode::DomainError, beta.name + " evaluated outside its domain at " + std::to_string(v));
            out[k] = beta.value(v);
        }
        return out;
    };
    auto flux = [&](double z) {
        const ScalarField b = beta_field(rho.field_at(z));
        const VectorField2 v = u.field_at(z);
        const double h = b.grid().spacing();
        double acc = 0.0;
        for (std::size_t k = 0; k < b.size(); ++k) acc += b[k] * (v.x[k] * grad_phi.x[k] + v.y[k] * grad_phi.y[k]);
        return acc * h * h;
    };

    std::vector<double> nodes{t0};
    for (double z : rho.times())
        if (z > t0 && z < t) nodes.push_back(z);
    if (t > t0) nodes.push_back(t);
    double rhs = 0.0;
    double prev = flux(nodes.front());
    for (std::size_t k = 1; k < nodes.size(); ++k) {
        const double cur = flux(nodes[k]);
        rhs += 0.5 * (nodes[k] - nodes[k - 1]) * (prev + cur);
        prev = cur;
    }
    const double lhs = inner(beta_field(rho.field_at(t)), phi) - inner(beta_field(rho.field_at(t0)), phi);
    return std::abs(lhs - rhs);
}

double support_radius(const ScalarField& f, double threshold) {
    const GridSpec& g = f.grid();
    const double h = g.spacing();
    const double c = 0.5 * g.length;
    double r2 = 0.0;
    auto min_image = [&](double d) {
        d = std::fmod(d, g.length);
        if (d > 0.5 * g.length) d -= g.length;
        if (d < -0.5 * g.length) d += g.length;
        return d;
    };
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) {
            if (!(std::abs(f(i, j)) > threshold)) continue;
            const double dx = min_image(i * h - c);
            const double dy = min_image(j * h - c);
            r2 = std::max(r2, dx * dx + dy * dy);
        }
    return std::sqrt(r2);
}

SupportReport support_growth_check(const ScalarField& rho_at_s, const VelocityTrack& u, double tau, double s,
                                   const TransportOptions& opts) {
    require_in_track(u, tau, "tau");
    require_in_track(u, s, "s");
    SupportReport rep;
    rep.r_initial = support_radius(rho_at_s);
    const double travel = std::abs(u.integrate([&](double z) { return u.u_inf(z); }, tau, s));
    const double h = u.grid().spacing();
    rep.budget = rep.r_initial + travel + 2.0 * h;
    if (rep.budget >= 0.5 * u.grid().length)
        throw Error(ErrorCode::WrapAround, "support plus travel budget reaches half the box");
    const ScalarField back = transport_density(rho_at_s, u, nullptr, s, tau, opts);
    rep.r_final = support_radius(back);
    rep.pass = rep.r_final <= rep.budget;
    return rep;
}

}  // namespace densiflow
