#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "densiflow/fields.hpp"
#include "densiflow/solver.hpp"

namespace densiflow {

/// Discrete weighted regularity functionals A0..A3 with their terms.
struct WeightedEnergies {
    double a0 = 0.0;
    double a1 = 0.0;
    double a2 = 0.0;
    std::optional<double> a3;
    /// Per-term values, e.g. "a1.sup", "a1.rho_dudt".
    std::map<std::string, double> components;
};

WeightedEnergies weighted_energies(const Trajectory& traj, bool include_a3 = false);

struct ZENorms {
    double norm_e = 0.0;
    double norm_z = 0.0;
    double k0 = 0.0;
};

double norm_e(const Trajectory& traj);
double norm_z(const Trajectory& traj);
/// int s ||grad u(s)||_inf^2 ds from per-step diagnostics.
double k0(const Trajectory& traj);
ZENorms ze_norms(const Trajectory& traj);
/// Z norm from already computed functionals.
double norm_z_from(const WeightedEnergies& w);

struct DecayReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
    bool pass = false;
};

/// max_t t ||u(t)||_inf^2 against norm_z^2.
DecayReport linfty_decay_check(const Trajectory& traj);

enum class InequalityKind { Ladyzhenskaya, Agmon, InterpInf };

InequalityKind parse_inequality_kind(const std::string& name);

/// Ratio of the left side to the right side without constant.
double inequality_ratio(const ScalarField& f, InequalityKind kind);

struct GronwallReport {
    bool premise_holds = false;
    bool bound_holds = false;
    /// max_i f_i / (a exp(trapz g)_i) over indices with a positive bound.
    double worst_ratio = 0.0;
};

/// Checks f_i <= a + trapz(g f)[0, t_i] and f_i <= a exp(trapz g [0, t_i]) (1 + tol_i)
/// where tol_i is the exact discrete slack of the trapezoid recursion.
GronwallReport gronwall_check(const std::vector<double>& t, const std::vector<double>& f, double a,
                              const std::vector<double>& g);

/// Cumulative trapezoid integral with out[0] = 0.
std::vector<double> cumulative_trapezoid(const std::vector<double>& t, const std::vector<double>& f);

/// Time derivative of snapshot data: centered at interior nodes (second order
/// on nonuniform grids), one-sided at the ends.
std::vector<ScalarField> time_derivative(const std::vector<double>& t, const std::vector<const ScalarField*>& f);

/// Material derivative a + (u . grad) a of a scalar.
ScalarField material(const ScalarField& dadt, const ScalarField& a, const VectorField2& u);

}  // namespace densiflow
