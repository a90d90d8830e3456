#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "densiflow/grid.hpp"
#include "densiflow/initial.hpp"
#include "densiflow/solver.hpp"

namespace densiflow {

enum class ExperimentKind { Run, Cauchy, Stability, RelativeEnergy, Wminus14, FlowCheck, Lemmas };

ExperimentKind parse_experiment_kind(const std::string& name);
std::string to_string(ExperimentKind kind);

/// Parameters of every experiment; each subcommand reads its own subset.
struct ExperimentParams {
    /// Mollification levels of the Cauchy experiment.
    std::vector<int> levels{1, 2, 4, 8, 16};
    /// Mollification level of the regular member in paired checks.
    int regular_level = 4;
    /// Number of perturbation pairs and their relative size for the stability constant.
    int pairs = 10;
    double perturbation = 0.1;
    std::vector<double> s_list{0.25, 0.5, 1.0};
    double kappa = 1.5;
    /// Flow-map integration substep and the (tau, s) sample times.
    double substep = 1e-3;
    std::vector<double> times{0.2, 0.4, 0.6, 0.8, 1.0};
    /// Lemma checks.
    std::vector<double> c_list{0.5, 1.0, 2.0};
    std::vector<double> p_list{2.0, 3.0, 4.0};
    int trials = 200;
    double horizon = 1.0;
};

struct RunConfig {
    GridSpec grid;
    SolverConfig solver;
    InitialKind initial_kind = InitialKind::RandomBandlimited;
    InitialParams initial;
    std::uint64_t seed = 1;
    ExperimentKind experiment = ExperimentKind::Run;
    ExperimentParams params;
    std::string out_dir = "out";
};

/// Strict key = value parsing with dotted keys and '#' comments. Unknown or
/// duplicate keys and malformed values are rejected; the result is validated.
/// Throws ParseError (with line number) or ValidationError (naming the key).
RunConfig parse_config(const std::string& text);

/// Reads and parses a file; IoError if it cannot be read.
RunConfig load_config(const std::string& path);

/// Throws ValidationError naming the first offending key.
void validate(const RunConfig& cfg);

/// Every key in a fixed order with shortest round-trip numbers.
std::string serialize(const RunConfig& cfg);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

/// Names of every accepted key.
std::vector<std::string> config_keys();

}  // namespace densiflow
