#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <omp.h>

#include "CLI11.hpp"

#include "densiflow/config.hpp"
#include "densiflow/error.hpp"
#include "densiflow/experiments.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitError = 2;

struct Options {
    std::string config;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::vector<double> c_list;
    std::vector<double> p_list;
    std::optional<int> trials;
};

void apply_threads(const Options& opt) {
    int threads = opt.threads.value_or(0);
    if (const char* env = std::getenv("DENSIFLOW_THREADS"); env != nullptr && *env != '\0') {
        try {
            threads = std::stoi(env);
        } catch (const std::exception&) {
            throw densiflow::Error(densiflow::ErrorCode::ValidationError, "DENSIFLOW_THREADS must be an integer");
        }
    }
    if (threads < 0) throw densiflow::Error(densiflow::ErrorCode::ValidationError, "thread count must be >= 0");
    if (threads > 0) omp_set_num_threads(threads);
}

int execute(const std::string& subcommand, const Options& opt) {
    densiflow::RunConfig cfg = opt.config.empty() ? densiflow::parse_config("") : densiflow::load_config(opt.config);
    cfg.experiment = densiflow::parse_experiment_kind(subcommand);
    if (opt.out) cfg.out_dir = *opt.out;
    if (opt.seed) cfg.seed = *opt.seed;
    if (!opt.c_list.empty()) cfg.params.c_list = opt.c_list;
    if (!opt.p_list.empty()) cfg.params.p_list = opt.p_list;
    if (opt.trials) cfg.params.trials = *opt.trials;
    densiflow::validate(cfg);
    apply_threads(opt);
    const densiflow::ExperimentOutcome outcome = densiflow::run_experiment(cfg);
    std::cout << outcome.summary.dump(2) << "\n";
    std::cout << subcommand << ": " << (outcome.pass ? "PASS" : "FAIL") << "\n";
    return outcome.pass ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Variable-density Navier-Stokes experiments"};
    app.require_subcommand(1);
    Options opt;
    const std::vector<std::string> names{"run", "cauchy", "stability", "relative-energy", "wminus14", "flow-check",
                                         "lemmas"};
    for (const std::string& name : names) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", opt.config, "key = value configuration file");
        sub->add_option("--out", opt.out, "output directory");
        sub->add_option("--seed", opt.seed, "random seed");
        sub->add_option("--threads", opt.threads, "OpenMP threads (DENSIFLOW_THREADS overrides)");
        if (name == "lemmas") {
            sub->add_option("--c", opt.c_list, "kernel strengths");
            sub->add_option("--p", opt.p_list, "Lebesgue exponents");
            sub->add_option("--trials", opt.trials, "random trials per (c, p)");
        } else {
            sub->get_option("--config")->required();
        }
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitPass : kExitError;
    }
    try {
        for (const std::string& name : names)
            if (app.got_subcommand(name)) return execute(name, opt);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
