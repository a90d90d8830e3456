#pragma once

#include <string>
#include <utility>

#include "json.hpp"

#include "densiflow/config.hpp"
#include "densiflow/solver.hpp"

namespace densiflow {

/// Verdict and JSON summary of one experiment; files go to cfg.out_dir.
struct ExperimentOutcome {
    bool pass = false;
    nlohmann::json summary;
};

/// Dispatches on cfg.experiment. Creates the output directory.
ExperimentOutcome run_experiment(const RunConfig& cfg);

ExperimentOutcome experiment_run(const RunConfig& cfg);
ExperimentOutcome experiment_cauchy(const RunConfig& cfg);
ExperimentOutcome experiment_stability(const RunConfig& cfg);
ExperimentOutcome experiment_relative_energy(const RunConfig& cfg);
ExperimentOutcome experiment_wminus14(const RunConfig& cfg);
ExperimentOutcome experiment_flow_check(const RunConfig& cfg);
ExperimentOutcome experiment_lemmas(const RunConfig& cfg);

/// Solver settings shared by both members of a pair: a cfl-mode config is
/// converted to the fixed step min(stable_dt) of the two initial states.
SolverConfig pair_solver_config(const SolverConfig& cfg, const State& a, const State& b);

/// traj1 from the configured initial data, traj2 from its mollification at params.regular_level.
std::pair<Trajectory, Trajectory> make_regular_pair(const RunConfig& cfg);

}  // namespace densiflow
