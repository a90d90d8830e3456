#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "densiflow/fft.hpp"
#include "densiflow/fields.hpp"
#include "densiflow/interpolation.hpp"
#include "densiflow/transport.hpp"

namespace densiflow {

struct DensityBounds {
    double c0 = 0.5;
    double C0 = 2.0;

    void validate() const;
};

struct SolverConfig {
    double nu = 0.05;
    /// Exactly one of dt / cfl is set.
    std::optional<double> dt;
    std::optional<double> cfl = 0.4;
    double T = 1.0;
    int snapshot_stride = 1;
    double pressure_tol = 1e-10;
    double div_tol = 1e-8;
    int max_cg_iters = 500;
    DensityBounds bounds;
    DensityInterp density_interp = DensityInterp::ClampedSpline;

    void validate() const;
};

/// Largest admissible Courant number u_inf dt / h for a fixed-step run.
inline constexpr double kMaxCourant = 1.0;
/// Largest admissible diffusion number nu dt / (rho_min h^2).
inline constexpr double kMaxDiffusionNumber = 0.2;

struct State {
    double t = 0.0;
    ScalarField rho;
    VectorField2 u;
    /// Pressure with zero mean.
    ScalarField p;
};

struct StepDiagnostics {
    double t = 0.0;
    double kinetic = 0.0;
    /// nu * int_0^t ||grad u||_2^2, trapezoid over steps.
    double dissipation_cum = 0.0;
    double grad_u_inf = 0.0;
    double u_inf = 0.0;
    int cg_iters = 0;
    /// ||grad u||_2^2 and ||u||_2^2 at t.
    double grad_u_l2sq = 0.0;
    double u_l2sq = 0.0;
    double rho_min = 0.0;
    double rho_max = 0.0;
    double mass = 0.0;
    double div_inf = 0.0;
};

struct Trajectory {
    SolverConfig config;
    /// States at stride instants; index 0 is the initial state.
    std::vector<State> states;
    /// One entry per step; index 0 describes the initial state.
    std::vector<StepDiagnostics> diagnostics;

    [[nodiscard]] std::vector<double> times() const;
    [[nodiscard]] VelocityTrack velocity_track() const;
    [[nodiscard]] ScalarTrack density_track() const;
    [[nodiscard]] const GridSpec& grid() const { return states.front().rho.grid(); }
};

struct PcgResult {
    int iterations = 0;
    double relative_residual = 0.0;
};

/// Solves -div T[sigma grad x] = b on the dealiased band by preconditioned
/// conjugate gradients in spectral space. x holds the initial guess on entry.
/// The preconditioner is the spectral inverse of -mean(sigma) Laplacian.
PcgResult solve_variable_poisson(const ScalarField& sigma, const Spectrum& b, Spectrum& x, double tol, int max_iters);

/// Applies -div T[sigma grad x].
Spectrum apply_variable_poisson(const ScalarField& sigma, const Spectrum& x);

/// Pressure consistent with (rho, u): -div T[grad P / rho] = -div F(u, rho), zero mean.
ScalarField consistent_pressure(const ScalarField& rho, const VectorField2& u, const SolverConfig& cfg,
                                const ScalarField* guess = nullptr);

/// Acceleration du/dt = F(u, rho) - T[grad P / rho] of the semi-discrete system.
VectorField2 acceleration(const State& s, const SolverConfig& cfg);

/// Stable step size for the current state (cfl mode) or the fixed step.
double stable_dt(const State& s, const SolverConfig& cfg);

/// Advances one step of size dt; reports pressure-solve iterations if asked.
State step(const State& state, double dt, const SolverConfig& cfg, int* cg_iters = nullptr);

/// Integrates to cfg.T, storing states every snapshot_stride steps and at T.
Trajectory run(const ScalarField& rho0, const VectorField2& u0, const SolverConfig& cfg);

/// Observer hook: called after every step with the new state and diagnostics.
using StepObserver = std::function<void(const State&, const StepDiagnostics&)>;
Trajectory run(const ScalarField& rho0, const VectorField2& u0, const SolverConfig& cfg, const StepObserver& obs);

/// Separable test function phi(t, x) = chi(t) psi(x) on [0, T].
struct TestFunction {
    std::function<double(double)> chi = [](double) { return 1.0; };
    std::function<double(double)> chi_dot = [](double) { return 0.0; };
    ScalarField psi;
    /// Used by the momentum identity; must be divergence free.
    VectorField2 psi_vec;
};

enum class WeakForm { Mass, Momentum, Incompressibility };

/// |LHS - RHS| of the chosen weak identity over the trajectory's time span,
/// including the terminal term at the final stored time.
double residual_weak_form(const Trajectory& traj, const TestFunction& phi, WeakForm which);

struct EnergyReport {
    std::vector<double> t;
    std::vector<double> lhs;
    double rhs = 0.0;
    std::vector<double> gap;
    double max_rel_gap = 0.0;
};

EnergyReport energy_report(const Trajectory& traj);

}  // namespace densiflow
