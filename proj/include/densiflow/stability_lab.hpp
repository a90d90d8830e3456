#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "densiflow/fields.hpp"
#include "densiflow/functionals.hpp"
#include "densiflow/solver.hpp"

namespace densiflow {

/// Difference data of two trajectories on a shared time grid.
struct PairDiagnostics {
    std::vector<double> t;
    /// ||u1 - u2||_2 and ||grad (u1 - u2)||_2 per stored state.
    std::vector<double> delta_u_l2;
    std::vector<double> delta_grad_l2;
    /// sup ||du||_2^2 + nu int ||grad du||_2^2.
    double norm_e_delta = 0.0;
};

/// Throws GridMismatch unless grids, nu, stored times and rho_0 agree.
void require_compatible(const Trajectory& a, const Trajectory& b);

PairDiagnostics pair_diagnostics(const Trajectory& a, const Trajectory& b);

struct CauchyEntry {
    int n = 0;
    int m = 0;
    double initial_gap = 0.0;  // ||u0^n - u0^m||_2
    double norm_e_delta = 0.0;
    double ratio = 0.0;
    bool degenerate = false;
};

struct CauchyTable {
    std::vector<int> levels;
    std::vector<CauchyEntry> entries;

    [[nodiscard]] double max_ratio() const;
    [[nodiscard]] double min_ratio() const;
};

/// Builds the table from trajectories already run at the given levels.
CauchyTable cauchy_table(const std::vector<int>& levels, const std::vector<const Trajectory*>& runs);

/// Runs the solver from (rho0, mollify(u0, n)) for each level and tabulates pairs.
/// Optionally hands back the trajectories.
CauchyTable cauchy_experiment(const ScalarField& rho0, const VectorField2& u0, const std::vector<int>& levels,
                              const SolverConfig& cfg, std::vector<Trajectory>* runs = nullptr);

struct RelativeEnergyReport {
    std::vector<double> t;
    std::vector<double> lhs;
    std::vector<double> rhs;
    std::vector<double> tol;
    std::vector<bool> pass;
    bool all_pass = true;
    /// max over t of (lhs - rhs) / tol (<= 1 when everything passes).
    double worst = 0.0;
};

/// Relative energy identity with traj2 as the regular member:
/// 1/2 ||sqrt(rho1) du(t)||^2 + nu int ||grad du||^2
///   <= -int int drho udot2 . du - int int rho1 du (x) du : grad u2 + 1/2 ||sqrt(rho0) du(0)||^2 + tol(t).
RelativeEnergyReport relative_energy_check(const Trajectory& traj1, const Trajectory& traj2);

/// Material acceleration of a state from its semi-discrete time derivative.
VectorField2 material_acceleration(const State& s, const SolverConfig& cfg);

struct TestFunctionSpec {
    std::string name;
    ScalarField phi;
};

/// Low-mode trigonometric polynomials, a compact bump and phi = 1.
std::vector<TestFunctionSpec> default_test_functions(const GridSpec& grid);

struct WminusEntry {
    std::string phi;
    double s = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    double log_rhs = 0.0;
    double ratio = 0.0;
    /// rhs = 0 and lhs at round-off: the mass functional.
    bool degenerate_zero = false;
    bool pass = false;
};

struct WminusReport {
    std::vector<WminusEntry> entries;
    double kappa = 1.5;
    double z_norm = 0.0;
    bool pass = true;
    double worst_ratio = 0.0;
};

/// Pairing bound for the density difference; z_override replaces norm_z(traj2).
WminusReport wminus14_check(const Trajectory& traj1, const Trajectory& traj2,
                            const std::vector<TestFunctionSpec>& phis, const std::vector<double>& s_list,
                            double kappa = 1.5, std::optional<double> z_override = std::nullopt);

/// s int_0^1 exp(z sqrt(-ln x)) g(s x) dx on the graded grid x_j = exp(-(j/J)^2 Lambda),
/// returned as a logarithm to survive large z.
double log_kernel_integral(double z, double s, const std::function<double(double)>& g, int nodes = 4000);

struct StabilityConstantReport {
    double c = 0.0;
    std::vector<double> per_pair;
    std::vector<bool> degenerate;
    std::vector<double> u0_norm;
};

/// max over pairs of norm_e_delta / ||u0 - v0||_2^2, skipping degenerate pairs.
StabilityConstantReport stability_constant(const std::vector<std::pair<const Trajectory*, const Trajectory*>>& pairs);

struct VacuumReport {
    std::vector<double> t;
    std::vector<double> min_rho;
    std::vector<double> max_rho;
    bool pass = false;
};

VacuumReport vacuum_check(const Trajectory& traj);

struct GronwallClosure {
    GronwallReport report;
    double a = 0.0;
};

/// Feeds f = relative-energy left side and g = ||grad u2||^2 + s^2 ||grad udot2||^2
/// into gronwall_check with the smallest a that makes the premise hold.
GronwallClosure gronwall_closure(const Trajectory& traj1, const Trajectory& traj2);

}  // namespace densiflow
