#pragma once

#include <array>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "densiflow/fields.hpp"
#include "densiflow/interpolation.hpp"

namespace densiflow {

/// Velocity samples at increasing instants; linear in time, periodic cubic
/// spline in space. The spatial gradient is splined from spectral derivatives.
class VelocityTrack {
public:
    VelocityTrack(std::vector<double> times, std::vector<VectorField2> snapshots);

    [[nodiscard]] const GridSpec& grid() const noexcept { return grid_; }
    [[nodiscard]] double t_min() const noexcept { return times_.front(); }
    [[nodiscard]] double t_max() const noexcept { return times_.back(); }
    [[nodiscard]] const std::vector<double>& times() const noexcept { return times_; }
    [[nodiscard]] const std::vector<VectorField2>& snapshots() const noexcept { return snapshots_; }
    [[nodiscard]] bool contains(double t) const noexcept;

    /// u = (u_x, u_y); du = (du_x/dx, du_x/dy, du_y/dx, du_y/dy).
    void eval(double t, double x, double y, double* u, double* du) const noexcept;
    /// Velocity field at time t (linear blend of snapshots).
    [[nodiscard]] VectorField2 field_at(double t) const;
    /// Sample max of |u(t)|.
    [[nodiscard]] double u_inf(double t) const;
    /// Sample max of the Frobenius norm of grad u(t).
    [[nodiscard]] double grad_inf(double t) const;
    /// Trapezoid integral of a time profile over [a, b] (either order) on the
    /// snapshot nodes refined by `refine` points per interval.
    [[nodiscard]] double integrate(const std::function<double(double)>& g, double a, double b, int refine = 8) const;

private:
    /// Segment index k with times[k] <= t <= times[k+1] and blend weight.
    void segment(double t, std::size_t& k, double& w) const noexcept;

    GridSpec grid_{};
    std::vector<double> times_;
    std::vector<VectorField2> snapshots_;
    std::vector<std::array<ScalarField, 4>> gradients_;
    std::vector<SplineSet> splines_;
};

/// Scalar samples on the same kind of time grid (density or source tracks).
class ScalarTrack {
public:
    ScalarTrack(std::vector<double> times, std::vector<ScalarField> snapshots);

    [[nodiscard]] const GridSpec& grid() const noexcept { return grid_; }
    [[nodiscard]] const std::vector<double>& times() const noexcept { return times_; }
    [[nodiscard]] const std::vector<ScalarField>& snapshots() const noexcept { return snapshots_; }
    [[nodiscard]] bool contains(double t) const noexcept;
    [[nodiscard]] double eval(double t, double x, double y) const noexcept;
    [[nodiscard]] ScalarField field_at(double t) const;

private:
    GridSpec grid_{};
    std::vector<double> times_;
    std::vector<ScalarField> snapshots_;
    std::vector<SplineSet> splines_;
};

/// Sampled flow X(t, s, x) with its differential.
struct FlowMap {
    double s = 0.0;
    double t = 0.0;
    /// X(t, s, x) - x, unwrapped.
    VectorField2 displacement;
    /// dX1/dx, dX1/dy, dX2/dx, dX2/dy
    std::array<ScalarField, 4> differential;
    ScalarField jacobian;

    /// Sample max of the operator 2-norm of DX.
    [[nodiscard]] double dx_norm_inf() const;
    /// Sample max of |J - 1|.
    [[nodiscard]] double jacobian_defect() const;
};

/// Characteristic positions and differentials for a set of start points.
struct PointFlow {
    std::vector<double> x;
    std::vector<double> y;
    /// Row-major 2x2 differential per point (empty when not tracked).
    std::vector<std::array<double, 4>> dx;
};

/// Integrates dX/dz = u(z, X) from z = from to z = to with classical RK4 and
/// m = max(1, ceil(|to - from| / substep)) equal steps.
PointFlow trace_points(const VelocityTrack& u, std::vector<double> x0, std::vector<double> y0, double from,
                       double to, double substep, bool with_differential);

/// Flow from base time s to t evaluated at every grid point.
FlowMap advance_flow(const VelocityTrack& u, double s, double t, double substep);

/// Flows from base time s to several targets, sharing integration work.
/// Targets on each side of s are reached in order; results follow input order.
std::vector<FlowMap> advance_flow_multi(const VelocityTrack& u, double s, const std::vector<double>& targets,
                                        double substep);

/// Verdict of a two-sided inequality check.
struct CheckResult {
    double lhs = 0.0;
    double rhs = 0.0;
    /// (rhs - lhs) / max(|rhs|, tiny): positive when the inequality holds.
    double margin = 0.0;
    bool pass = false;
};

CheckResult make_check(double lhs, double rhs, double rel_tol);

/// ||DX(t,s)||_inf <= exp(int_s^t ||grad u||_inf).
CheckResult dx_bound_check(const FlowMap& flow, const VelocityTrack& u, double rel_tol = 1e-9);

/// ||DX(t,s)||_inf <= exp(z |ln(t/s)|^(1/2)); both times must be positive.
CheckResult log_kernel_flow_check(const FlowMap& flow, double z_norm, double rel_tol = 1e-9);

struct TransportOptions {
    double substep = 1e-2;
    DensityInterp interp = DensityInterp::Bilinear;
};

/// rho(s, x) = rho(tau, X(tau, s, x)) + int_tau^s f(z, X(z, s, x)) dz.
ScalarField transport_density(const ScalarField& rho_at_tau, const VelocityTrack& u, const ScalarTrack* f,
                              double tau, double s, const TransportOptions& opts = {});

/// A renormalization map on an admissible interval.
struct Beta {
    std::string name;
    std::function<double(double)> value;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    static Beta identity();
    static Beta square();
    static Beta reciprocal();
};

/// |int beta(rho(t)) phi - int beta(rho_0) phi - int_0^t int beta(rho) u . grad phi|
/// with time trapezoid on the track nodes up to t.
double renormalization_residual(const ScalarTrack& rho, const VelocityTrack& u, const Beta& beta,
                                const ScalarField& phi, double t);

struct SupportReport {
    double r_initial = 0.0;
    double r_final = 0.0;
    double budget = 0.0;
    bool pass = false;
};

/// Numerical support radius (|f| > threshold) about the box center, with
/// periodic minimal-image distances. Returns 0 for an empty support.
double support_radius(const ScalarField& f, double threshold = 1e-10);

/// Transports the terminal field rho(s) back to tau and compares supports.
SupportReport support_growth_check(const ScalarField& rho_at_s, const VelocityTrack& u, double tau, double s,
                                   const TransportOptions& opts = {});

}  // namespace densiflow
