#include "densiflow/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <string_view>

#include "densiflow/error.hpp"

namespace densiflow {

namespace {

[[noreturn]] void invalid(const std::string& key, const std::string& why) {
    throw Error(ErrorCode::ValidationError, key + ": " + why);
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, std::string_view text) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty() || !std::isfinite(v))
        invalid(key, "expected a finite number, got '" + std::string(text) + "'");
    return v;
}

template <typename Int>
Int parse_int(const std::string& key, std::string_view text) {
    Int v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
        invalid(key, "expected an integer, got '" + std::string(text) + "'");
    return v;
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& key, std::string_view text, Parse parse) {
    std::vector<T> out;
    while (true) {
        const auto comma = text.find(',');
        out.push_back(parse(key, trim(text.substr(0, comma))));
        if (comma == std::string_view::npos) break;
        text.remove_prefix(comma + 1);
    }
    return out;
}

template <typename T, typename Format>
std::string join(const std::vector<T>& values, Format format) {
    std::string out;
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (k > 0) out += ", ";
        out += format(values[k]);
    }
    return out;
}

std::string format_int(long long v) { return std::to_string(v); }

/// One accepted key: how to print it (nullopt = omitted) and how to set it.
struct KeySpec {
    std::string name;
    std::function<std::optional<std::string>(const RunConfig&)> get;
    std::function<void(RunConfig&, std::string_view)> set;
};

const std::vector<KeySpec>& registry() {
    static const std::vector<KeySpec> keys = [] {
        std::vector<KeySpec> k;
        const auto dbl = [&k](const std::string& name, double& (*ref)(RunConfig&)) {
            k.push_back({name,
                         [ref](const RunConfig& c) {
                             return std::optional<std::string>(format_double(ref(const_cast<RunConfig&>(c))));
                         },
                         [ref, name](RunConfig& c, std::string_view v) { ref(c) = parse_double(name, v); }});
        };
        const auto integer = [&k](const std::string& name, int& (*ref)(RunConfig&)) {
            k.push_back({name,
                         [ref](const RunConfig& c) {
                             return std::optional<std::string>(format_int(ref(const_cast<RunConfig&>(c))));
                         },
                         [ref, name](RunConfig& c, std::string_view v) { ref(c) = parse_int<int>(name, v); }});
        };
        const auto dlist = [&k](const std::string& name, std::vector<double>& (*ref)(RunConfig&)) {
            k.push_back({name,
                         [ref](const RunConfig& c) {
                             return std::optional<std::string>(join(ref(const_cast<RunConfig&>(c)), format_double));
                         },
                         [ref, name](RunConfig& c, std::string_view v) {
                             ref(c) = parse_list<double>(name, v, parse_double);
                         }});
        };

        integer("grid.n", [](RunConfig& c) -> int& { return c.grid.n; });
        dbl("grid.length", [](RunConfig& c) -> double& { return c.grid.length; });

        dbl("solver.nu", [](RunConfig& c) -> double& { return c.solver.nu; });
        k.push_back({"solver.dt",
                     [](const RunConfig& c) {
                         return c.solver.dt ? std::optional<std::string>(format_double(*c.solver.dt)) : std::nullopt;
                     },
                     [](RunConfig& c, std::string_view v) { c.solver.dt = parse_double("solver.dt", v); }});
        k.push_back({"solver.cfl",
                     [](const RunConfig& c) {
                         return c.solver.cfl ? std::optional<std::string>(format_double(*c.solver.cfl))
                                             : std::nullopt;
                     },
                     [](RunConfig& c, std::string_view v) { c.solver.cfl = parse_double("solver.cfl", v); }});
        dbl("solver.T", [](RunConfig& c) -> double& { return c.solver.T; });
        integer("solver.snapshot_stride", [](RunConfig& c) -> int& { return c.solver.snapshot_stride; });
        dbl("solver.pressure_tol", [](RunConfig& c) -> double& { return c.solver.pressure_tol; });
        dbl("solver.div_tol", [](RunConfig& c) -> double& { return c.solver.div_tol; });
        integer("solver.max_cg_iters", [](RunConfig& c) -> int& { return c.solver.max_cg_iters; });
        k.push_back({"solver.density_interp",
                     [](const RunConfig& c) {
                         return std::optional<std::string>(
                             c.solver.density_interp == DensityInterp::Bilinear ? "bilinear" : "clamped_spline");
                     },
                     [](RunConfig& c, std::string_view v) {
                         if (v == "bilinear") c.solver.density_interp = DensityInterp::Bilinear;
                         else if (v == "clamped_spline") c.solver.density_interp = DensityInterp::ClampedSpline;
                         else invalid("solver.density_interp", "expected bilinear or clamped_spline");
                     }});
        dbl("bounds.c0", [](RunConfig& c) -> double& { return c.solver.bounds.c0; });
        dbl("bounds.C0", [](RunConfig& c) -> double& { return c.solver.bounds.C0; });

        k.push_back({"initial.kind",
                     [](const RunConfig& c) { return std::optional<std::string>(to_string(c.initial_kind)); },
                     [](RunConfig& c, std::string_view v) {
                         try {
                             c.initial_kind = parse_initial_kind(std::string(v));
                         } catch (const Error&) {
                             invalid("initial.kind", "unknown initial kind '" + std::string(v) + "'");
                         }
                     }});
        k.push_back({"initial.seed",
                     [](const RunConfig& c) { return std::optional<std::string>(std::to_string(c.seed)); },
                     [](RunConfig& c, std::string_view v) { c.seed = parse_int<std::uint64_t>("initial.seed", v); }});
        dbl("initial.amplitude", [](RunConfig& c) -> double& { return c.initial.amplitude; });
        integer("initial.kmax", [](RunConfig& c) -> int& { return c.initial.kmax; });
        dbl("initial.slope", [](RunConfig& c) -> double& { return c.initial.slope; });
        dbl("initial.rho_lo", [](RunConfig& c) -> double& { return c.initial.rho_lo; });
        dbl("initial.rho_hi", [](RunConfig& c) -> double& { return c.initial.rho_hi; });
        integer("initial.rho_kmax", [](RunConfig& c) -> int& { return c.initial.rho_kmax; });
        dbl("initial.blob_width", [](RunConfig& c) -> double& { return c.initial.blob_width; });
        dbl("initial.blob_x", [](RunConfig& c) -> double& { return c.initial.blob_x; });
        dbl("initial.blob_y", [](RunConfig& c) -> double& { return c.initial.blob_y; });
        integer("initial.blob_count", [](RunConfig& c) -> int& { return c.initial.blob_count; });

        k.push_back({"experiment.kind",
                     [](const RunConfig& c) { return std::optional<std::string>(to_string(c.experiment)); },
                     [](RunConfig& c, std::string_view v) {
                         try {
                             c.experiment = parse_experiment_kind(std::string(v));
                         } catch (const Error&) {
                             invalid("experiment.kind", "unknown experiment '" + std::string(v) + "'");
                         }
                     }});
        k.push_back({"experiment.levels",
                     [](const RunConfig& c) {
                         return std::optional<std::string>(join(c.params.levels, [](int v) { return format_int(v); }));
                     },
                     [](RunConfig& c, std::string_view v) {
                         c.params.levels = parse_list<int>("experiment.levels", v, parse_int<int>);
                     }});
        integer("experiment.regular_level", [](RunConfig& c) -> int& { return c.params.regular_level; });
        integer("experiment.pairs", [](RunConfig& c) -> int& { return c.params.pairs; });
        dbl("experiment.perturbation", [](RunConfig& c) -> double& { return c.params.perturbation; });
        dlist("experiment.s_list", [](RunConfig& c) -> std::vector<double>& { return c.params.s_list; });
        dbl("experiment.kappa", [](RunConfig& c) -> double& { return c.params.kappa; });
        dbl("experiment.substep", [](RunConfig& c) -> double& { return c.params.substep; });
        dlist("experiment.times", [](RunConfig& c) -> std::vector<double>& { return c.params.times; });
        dlist("experiment.c_list", [](RunConfig& c) -> std::vector<double>& { return c.params.c_list; });
        dlist("experiment.p_list", [](RunConfig& c) -> std::vector<double>& { return c.params.p_list; });
        integer("experiment.trials", [](RunConfig& c) -> int& { return c.params.trials; });
        dbl("experiment.horizon", [](RunConfig& c) -> double& { return c.params.horizon; });

        k.push_back({"output.dir", [](const RunConfig& c) { return std::optional<std::string>(c.out_dir); },
                     [](RunConfig& c, std::string_view v) { c.out_dir = std::string(v); }});
        return k;
    }();
    return keys;
}

void require(bool ok, const std::string& key, const std::string& why) {
    if (!ok) invalid(key, why);
}

void require_times(const std::vector<double>& times, double horizon, const std::string& key) {
    require(!times.empty(), key, "list must not be empty");
    for (double t : times) require(t > 0.0 && t <= horizon, key, "times must lie in (0, solver.T]");
}

}  // namespace

ExperimentKind parse_experiment_kind(const std::string& name) {
    for (ExperimentKind k : {ExperimentKind::Run, ExperimentKind::Cauchy, ExperimentKind::Stability,
                             ExperimentKind::RelativeEnergy, ExperimentKind::Wminus14, ExperimentKind::FlowCheck,
                             ExperimentKind::Lemmas})
        if (to_string(k) == name) return k;
    throw Error(ErrorCode::BadParams, "unknown experiment '" + name + "'");
}

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::Run: return "run";
        case ExperimentKind::Cauchy: return "cauchy";
        case ExperimentKind::Stability: return "stability";
        case ExperimentKind::RelativeEnergy: return "relative-energy";
        case ExperimentKind::Wminus14: return "wminus14";
        case ExperimentKind::FlowCheck: return "flow-check";
        case ExperimentKind::Lemmas: return "lemmas";
    }
    return "run";
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw Error(ErrorCode::FormatError, "cannot format number");
    return std::string(buf, ptr);
}

std::vector<std::string> config_keys() {
    std::vector<std::string> out;
    for (const KeySpec& k : registry()) out.push_back(k.name);
    return out;
}

void validate(const RunConfig& c) {
    try {
        (void)GridSpec::make(c.grid.n, c.grid.length);
    } catch (const Error&) {
        require(c.grid.n >= 8 && is_power_of_two(c.grid.n), "grid.n", "must be a power of two >= 8");
        invalid("grid.length", "must be positive and finite");
    }
    const SolverConfig& s = c.solver;
    require(s.nu > 0.0, "solver.nu", "must be positive");
    require(s.dt.has_value() != s.cfl.has_value(), "solver.dt", "set exactly one of solver.dt and solver.cfl");
    if (s.dt) require(*s.dt > 0.0, "solver.dt", "must be positive");
    if (s.cfl) require(*s.cfl > 0.0 && *s.cfl <= kMaxCourant, "solver.cfl", "must lie in (0, 1]");
    require(s.T >= 0.0, "solver.T", "must be >= 0");
    require(s.snapshot_stride >= 1, "solver.snapshot_stride", "must be >= 1");
    require(s.pressure_tol > 0.0 && s.pressure_tol <= 1e-6, "solver.pressure_tol", "must lie in (0, 1e-6]");
    require(s.div_tol > 0.0, "solver.div_tol", "must be positive");
    require(s.max_cg_iters >= 1, "solver.max_cg_iters", "must be >= 1");
    require(s.bounds.c0 > 0.0, "bounds.c0", "must be positive");
    require(s.bounds.C0 >= s.bounds.c0, "bounds.C0", "must be >= bounds.c0");

    const InitialParams& p = c.initial;
    const int n = c.grid.n;
    require(p.kmax >= 1 && 3 * p.kmax < n, "initial.kmax", "must satisfy 1 <= 3 kmax < grid.n");
    require(p.rho_kmax >= 1 && 3 * p.rho_kmax < n, "initial.rho_kmax", "must satisfy 1 <= 3 rho_kmax < grid.n");
    require(p.rho_lo > 0.0 && p.rho_lo >= s.bounds.c0, "initial.rho_lo", "must be positive and >= bounds.c0");
    require(p.rho_hi >= p.rho_lo && p.rho_hi <= s.bounds.C0, "initial.rho_hi", "must lie in [rho_lo, bounds.C0]");
    require(p.blob_width > 0.0, "initial.blob_width", "must be positive");
    require(p.blob_count >= 1, "initial.blob_count", "must be >= 1");
    require(p.blob_x == -1.0 || (p.blob_x >= 0.0 && p.blob_x < c.grid.length), "initial.blob_x",
            "must be -1 (center) or lie in [0, grid.length)");
    require(p.blob_y == -1.0 || (p.blob_y >= 0.0 && p.blob_y < c.grid.length), "initial.blob_y",
            "must be -1 (center) or lie in [0, grid.length)");
    if (c.initial_kind == InitialKind::TaylorGreen)
        require(s.bounds.c0 <= 1.0 && s.bounds.C0 >= 1.0, "initial.kind", "taylor_green needs 1 inside the bounds");

    const ExperimentParams& e = c.params;
    require(!e.levels.empty(), "experiment.levels", "list must not be empty");
    std::set<int> seen;
    for (int level : e.levels) {
        require(level >= 1, "experiment.levels", "levels must be >= 1");
        require(seen.insert(level).second, "experiment.levels", "levels must be distinct");
    }
    require(e.regular_level >= 1, "experiment.regular_level", "must be >= 1");
    require(e.pairs >= 1, "experiment.pairs", "must be >= 1");
    require(e.perturbation > 0.0, "experiment.perturbation", "must be positive");
    require_times(e.s_list, s.T, "experiment.s_list");
    require(e.kappa > 0.0, "experiment.kappa", "must be positive");
    require(e.substep > 0.0, "experiment.substep", "must be positive");
    require_times(e.times, s.T, "experiment.times");
    require(!e.c_list.empty(), "experiment.c_list", "list must not be empty");
    for (double v : e.c_list) require(v >= 0.0, "experiment.c_list", "values must be >= 0");
    require(!e.p_list.empty(), "experiment.p_list", "list must not be empty");
    for (double v : e.p_list) require(v > 1.0, "experiment.p_list", "values must be > 1");
    require(e.trials >= 1, "experiment.trials", "must be >= 1");
    require(e.horizon > 0.0, "experiment.horizon", "must be positive");
    require(!c.out_dir.empty(), "output.dir", "must not be empty");
}

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::set<std::string> assigned;
    std::istringstream in(text);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        std::string_view view = line;
        if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        view = trim(view);
        if (view.empty()) continue;
        const auto eq = view.find('=');
        if (eq == std::string_view::npos)
            throw Error(ErrorCode::ParseError, "line " + std::to_string(number) + ": expected key = value");
        const std::string key(trim(view.substr(0, eq)));
        const std::string_view value = trim(view.substr(eq + 1));
        if (key.empty()) throw Error(ErrorCode::ParseError, "line " + std::to_string(number) + ": missing key");
        if (value.empty())
            throw Error(ErrorCode::ParseError, "line " + std::to_string(number) + ": missing value for " + key);
        const auto& keys = registry();
        const auto it = std::find_if(keys.begin(), keys.end(), [&](const KeySpec& k) { return k.name == key; });
        if (it == keys.end()) invalid(key, "unknown key (line " + std::to_string(number) + ")");
        if (!assigned.insert(key).second)
            throw Error(ErrorCode::ParseError, "line " + std::to_string(number) + ": duplicate key " + key);
        it->set(cfg, value);
    }
    // A fixed step replaces the default CFL mode unless both were given.
    if (assigned.count("solver.dt") && !assigned.count("solver.cfl")) cfg.solver.cfl.reset();
    validate(cfg);
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string serialize(const RunConfig& cfg) {
    std::string out;
    for (const KeySpec& k : registry()) {
        const std::optional<std::string> v = k.get(cfg);
        if (v) out += k.name + " = " + *v + "\n";
    }
    return out;
}

}  // namespace densiflow
