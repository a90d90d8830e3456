#include "densiflow/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "densiflow/analytic.hpp"
#include "densiflow/error.hpp"
#include "densiflow/functionals.hpp"
#include "densiflow/initial.hpp"
#include "densiflow/io.hpp"
#include "densiflow/stability_lab.hpp"
#include "densiflow/svg.hpp"
#include "densiflow/transport.hpp"

namespace densiflow {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string path_in(const RunConfig& cfg, const std::string& name) { return (fs::path(cfg.out_dir) / name).string(); }

/// JSON-safe number: non-finite values become null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json check_json(const CheckResult& r, json params) {
    return {{"lhs", number(r.lhs)}, {"rhs", number(r.rhs)}, {"margin", number(r.margin)}, {"pass", r.pass},
            {"params", std::move(params)}};
}

json params_json(const RunConfig& cfg) {
    return {{"n", cfg.grid.n},
            {"length", cfg.grid.length},
            {"nu", cfg.solver.nu},
            {"T", cfg.solver.T},
            {"dt", cfg.solver.dt ? number(*cfg.solver.dt) : json(nullptr)},
            {"cfl", cfg.solver.cfl ? number(*cfg.solver.cfl) : json(nullptr)},
            {"initial", to_string(cfg.initial_kind)},
            {"seed", cfg.seed}};
}

InitialData initial_data(const RunConfig& cfg) {
    return make_initial(cfg.initial_kind, cfg.initial, cfg.seed, GridSpec::make(cfg.grid.n, cfg.grid.length),
                        cfg.solver.bounds);
}

std::string indexed(const std::string& stem, std::size_t k) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%04zu.dfl", stem.c_str(), k);
    return buf;
}

State initial_state(const ScalarField& rho, const VectorField2& u) { return State{0.0, rho, u, ScalarField(rho.grid())}; }

}  // namespace

SolverConfig pair_solver_config(const SolverConfig& cfg, const State& a, const State& b) {
    SolverConfig out = cfg;
    if (cfg.cfl) {
        out.dt = std::min(stable_dt(a, cfg), stable_dt(b, cfg));
        out.cfl.reset();
    }
    return out;
}

std::pair<Trajectory, Trajectory> make_regular_pair(const RunConfig& cfg) {
    const InitialData init = initial_data(cfg);
    const VectorField2 regular = mollify(init.u, MollifierLevel{cfg.params.regular_level});
    const SolverConfig scfg =
        pair_solver_config(cfg.solver, initial_state(init.rho, init.u), initial_state(init.rho, regular));
    Trajectory t1 = run(init.rho, init.u, scfg);
    Trajectory t2 = run(init.rho, regular, scfg);
    return {std::move(t1), std::move(t2)};
}

ExperimentOutcome experiment_run(const RunConfig& cfg) {
    const InitialData init = initial_data(cfg);
    const Trajectory traj = run(init.rho, init.u, cfg.solver);
    std::vector<std::string> files;
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        const State& s = traj.states[k];
        for (const auto& [stem, write] :
             std::vector<std::pair<std::string, std::function<void(const std::string&)>>>{
                 {"rho", [&](const std::string& p) { write_field(p, s.rho); }},
                 {"u", [&](const std::string& p) { write_field(p, s.u); }},
                 {"p", [&](const std::string& p) { write_field(p, s.p); }}}) {
            const std::string name = indexed(stem, k);
            write(path_in(cfg, name));
            files.push_back(name);
        }
    }
    write_trajectory_meta(path_in(cfg, "trajectory.meta.json"), traj, cfg, files);
    write_diagnostics_csv(path_in(cfg, "diagnostics.csv"), traj);

    const WeightedEnergies w = weighted_energies(traj, traj.states.size() >= 3);
    const ZENorms ze = ze_norms(traj);
    const DecayReport decay = linfty_decay_check(traj);
    json fj = {{"a0", number(w.a0)},         {"a1", number(w.a1)},     {"a2", number(w.a2)},
               {"norm_e", number(ze.norm_e)}, {"norm_z", number(ze.norm_z)}, {"k0", number(ze.k0)},
               {"linfty_ratio", number(decay.ratio)}};
    if (w.a3) fj["a3"] = number(*w.a3);
    write_report_json(path_in(cfg, "functionals.json"), fj);

    const EnergyReport energy = energy_report(traj);
    const VacuumReport vacuum = vacuum_check(traj);
    std::vector<double> rel_gap;
    for (double g : energy.gap) rel_gap.push_back(energy.rhs > 0.0 ? std::abs(g) / energy.rhs : std::abs(g));
    write_svg_plot(path_in(cfg, "energy_gap.svg"), {"Relative energy gap", "t", "|gap| / E(0)", true},
                   {{"gap", energy.t, rel_gap}});

    ExperimentOutcome out;
    out.pass = vacuum.pass && energy.max_rel_gap <= 1e-2;
    out.summary = {{"pass", out.pass},
                   {"worst_ratio", number(energy.max_rel_gap)},
                   {"params", params_json(cfg)},
                   {"steps", traj.diagnostics.size() - 1},
                   {"vacuum_pass", vacuum.pass},
                   {"max_rel_energy_gap", number(energy.max_rel_gap)}};
    write_report_json(path_in(cfg, "run.json"), out.summary);
    return out;
}

ExperimentOutcome experiment_cauchy(const RunConfig& cfg) {
    const InitialData init = initial_data(cfg);
    SolverConfig scfg = cfg.solver;
    if (scfg.cfl) {
        // Every level must share the time grid; the unmollified data bounds the step.
        scfg = pair_solver_config(cfg.solver, initial_state(init.rho, init.u), initial_state(init.rho, init.u));
    }
    const CauchyTable table = cauchy_experiment(init.rho, init.u, cfg.params.levels, scfg);
    std::vector<std::vector<double>> rows;
    std::vector<double> index, ratio;
    bool finite = true;
    bool any = false;
    for (std::size_t k = 0; k < table.entries.size(); ++k) {
        const CauchyEntry& e = table.entries[k];
        rows.push_back({double(e.n), double(e.m), e.initial_gap, e.norm_e_delta, e.ratio, e.degenerate ? 1.0 : 0.0});
        index.push_back(double(k));
        ratio.push_back(e.ratio);
        if (!e.degenerate) {
            any = true;
            finite = finite && std::isfinite(e.ratio);
        }
    }
    write_csv(path_in(cfg, "cauchy.csv"), {"n", "m", "initial_gap", "norm_e_delta", "ratio", "degenerate"}, rows);
    write_svg_plot(path_in(cfg, "cauchy_ratio.svg"), {"Cauchy ratios", "pair index", "ratio", false},
                   {{"ratio", index, ratio}});
    const double spread = any ? table.max_ratio() / table.min_ratio() : 0.0;
    ExperimentOutcome out;
    out.pass = any && finite && spread <= 4.0;
    out.summary = {{"pass", out.pass},
                   {"worst_ratio", number(table.max_ratio())},
                   {"min_ratio", number(any ? table.min_ratio() : 0.0)},
                   {"spread", number(spread)},
                   {"params", params_json(cfg)}};
    out.summary["params"]["levels"] = cfg.params.levels;
    write_report_json(path_in(cfg, "cauchy.json"), out.summary);
    return out;
}

ExperimentOutcome experiment_stability(const RunConfig& cfg) {
    const GridSpec grid = GridSpec::make(cfg.grid.n, cfg.grid.length);
    const InitialData init = initial_data(cfg);
    const double u_norm = norm(init.u, 2.0);
    std::vector<VectorField2> perturbed;
    for (int k = 1; k <= cfg.params.pairs; ++k) {
        const VectorField2 w =
            make_initial(InitialKind::RandomBandlimited, cfg.initial, cfg.seed + 1000 + static_cast<std::uint64_t>(k), grid,
                         cfg.solver.bounds)
                .u;
        VectorField2 v = init.u;
        v.axpy(cfg.params.perturbation * u_norm / norm(w, 2.0), w);
        perturbed.push_back(std::move(v));
    }
    SolverConfig scfg = cfg.solver;
    if (scfg.cfl) {
        double dt = kInf;
        const State base = initial_state(init.rho, init.u);
        for (const VectorField2& v : perturbed)
            dt = std::min(dt, *pair_solver_config(cfg.solver, base, initial_state(init.rho, v)).dt);
        scfg.dt = dt;
        scfg.cfl.reset();
    }
    const Trajectory base = run(init.rho, init.u, scfg);
    std::vector<Trajectory> others;
    for (const VectorField2& v : perturbed) others.push_back(run(init.rho, v, scfg));
    std::vector<std::pair<const Trajectory*, const Trajectory*>> pairs;
    for (const Trajectory& o : others) pairs.emplace_back(&base, &o);
    const StabilityConstantReport rep = stability_constant(pairs);

    std::vector<std::vector<double>> rows;
    std::vector<double> index;
    for (std::size_t k = 0; k < rep.per_pair.size(); ++k) {
        rows.push_back({double(k), rep.u0_norm[k], rep.per_pair[k], rep.degenerate[k] ? 1.0 : 0.0});
        index.push_back(double(k));
    }
    write_csv(path_in(cfg, "stability.csv"), {"pair", "u0_norm", "ratio", "degenerate"}, rows);
    write_svg_plot(path_in(cfg, "stability_ratio.svg"), {"Stability ratios", "pair index", "ratio", false},
                   {{"ratio", index, rep.per_pair}});
    ExperimentOutcome out;
    out.pass = std::isfinite(rep.c);
    out.summary = {{"pass", out.pass}, {"worst_ratio", number(rep.c)}, {"params", params_json(cfg)}};
    out.summary["params"]["pairs"] = cfg.params.pairs;
    out.summary["params"]["perturbation"] = cfg.params.perturbation;
    write_report_json(path_in(cfg, "stability.json"), out.summary);
    return out;
}

ExperimentOutcome experiment_relative_energy(const RunConfig& cfg) {
    const auto [t1, t2] = make_regular_pair(cfg);
    const RelativeEnergyReport rep = relative_energy_check(t1, t2);
    const GronwallClosure closure = gronwall_closure(t1, t2);
    std::vector<std::vector<double>> rows;
    std::vector<double> slack;
    for (std::size_t k = 0; k < rep.t.size(); ++k) {
        rows.push_back({rep.t[k], rep.lhs[k], rep.rhs[k], rep.tol[k], rep.pass[k] ? 1.0 : 0.0});
        slack.push_back(rep.rhs[k] + rep.tol[k] - rep.lhs[k]);
    }
    write_csv(path_in(cfg, "relative_energy.csv"), {"t", "lhs", "rhs", "tol", "pass"}, rows);
    write_svg_plot(path_in(cfg, "relative_energy_gap.svg"), {"Relative energy slack", "t", "rhs + tol - lhs", false},
                   {{"slack", rep.t, slack}});
    ExperimentOutcome out;
    out.pass = rep.all_pass && closure.report.bound_holds;
    out.summary = {{"pass", out.pass},
                   {"worst_ratio", number(rep.worst)},
                   {"gronwall_bound_holds", closure.report.bound_holds},
                   {"gronwall_worst_ratio", number(closure.report.worst_ratio)},
                   {"params", params_json(cfg)}};
    out.summary["params"]["regular_level"] = cfg.params.regular_level;
    write_report_json(path_in(cfg, "relative_energy.json"), out.summary);
    return out;
}

ExperimentOutcome experiment_wminus14(const RunConfig& cfg) {
    const auto [t1, t2] = make_regular_pair(cfg);
    const WminusReport rep =
        wminus14_check(t1, t2, default_test_functions(t1.grid()), cfg.params.s_list, cfg.params.kappa);
    std::vector<std::string> header{"phi", "s", "lhs", "rhs", "log_rhs", "ratio", "degenerate_zero", "pass"};
    std::string csv;
    for (std::size_t k = 0; k < header.size(); ++k) csv += (k ? "," : "") + header[k];
    csv += "\n";
    std::vector<PlotSeries> series;
    for (const WminusEntry& e : rep.entries) {
        csv += e.phi + "," + format_double(e.s) + "," + format_double(e.lhs) + "," + format_double(e.rhs) + "," +
               format_double(e.log_rhs) + "," + format_double(e.ratio) + "," + (e.degenerate_zero ? "1" : "0") + "," +
               (e.pass ? "1" : "0") + "\n";
        if (series.empty() || series.back().name != e.phi) series.push_back({e.phi, {}, {}});
        series.back().x.push_back(e.s);
        series.back().y.push_back(e.ratio);
    }
    write_text(path_in(cfg, "wminus14.csv"), csv);
    write_svg_plot(path_in(cfg, "wminus14_ratio.svg"), {"Pairing ratios", "s", "lhs / rhs", true}, series);
    ExperimentOutcome out;
    out.pass = rep.pass;
    out.summary = {{"pass", rep.pass},
                   {"worst_ratio", number(rep.worst_ratio)},
                   {"z_norm", number(rep.z_norm)},
                   {"params", params_json(cfg)}};
    out.summary["params"]["kappa"] = rep.kappa;
    out.summary["params"]["s_list"] = cfg.params.s_list;
    write_report_json(path_in(cfg, "wminus14.json"), out.summary);
    return out;
}

ExperimentOutcome experiment_flow_check(const RunConfig& cfg) {
    const InitialData init = initial_data(cfg);
    const Trajectory traj = run(init.rho, init.u, cfg.solver);
    const VelocityTrack track = traj.velocity_track();
    const double z = norm_z(traj);
    const double substep = cfg.params.substep;
    std::vector<double> times = cfg.params.times;
    std::sort(times.begin(), times.end());
    json checks = json::array();
    bool pass = true;
    double worst_margin = kInf;
    for (double s : times) {
        std::vector<double> targets;
        for (double t : times)
            if (t != s) targets.push_back(t);
        const std::vector<FlowMap> flows = advance_flow_multi(track, s, targets, substep);
        for (const FlowMap& f : flows) {
            const json params = {{"s", f.s}, {"t", f.t}, {"substep", substep}};
            const CheckResult dx = dx_bound_check(f, track);
            const CheckResult lk = log_kernel_flow_check(f, z);
            const CheckResult jac = make_check(f.jacobian_defect(), 1e-5, 0.0);
            checks.push_back({{"check", "dx_bound"}, {"result", check_json(dx, params)}});
            checks.push_back({{"check", "log_kernel"}, {"result", check_json(lk, params)}});
            checks.push_back({{"check", "jacobian"}, {"result", check_json(jac, params)}});
            pass = pass && dx.pass && lk.pass && jac.pass;
            worst_margin = std::min({worst_margin, dx.margin, lk.margin});
        }
    }
    // Round trip s -> t -> s from every grid point for the extreme pair.
    const GridSpec& g = traj.grid();
    std::vector<double> x0, y0;
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) {
            x0.push_back(i * g.spacing());
            y0.push_back(j * g.spacing());
        }
    const PointFlow fwd = trace_points(track, x0, y0, times.front(), times.back(), substep, false);
    const PointFlow back = trace_points(track, fwd.x, fwd.y, times.back(), times.front(), substep, false);
    double round_trip = 0.0;
    for (std::size_t k = 0; k < x0.size(); ++k)
        round_trip = std::max({round_trip, std::abs(back.x[k] - x0[k]), std::abs(back.y[k] - y0[k])});
    const CheckResult rt = make_check(round_trip, 1e-6, 0.0);
    checks.push_back({{"check", "round_trip"},
                      {"result", check_json(rt, {{"s", times.front()}, {"t", times.back()}, {"substep", substep}})}});
    pass = pass && rt.pass;

    ExperimentOutcome out;
    out.pass = pass;
    out.summary = {{"pass", pass}, {"worst_margin", number(worst_margin)}, {"z_norm", number(z)},
                   {"params", params_json(cfg)}, {"checks", checks}};
    write_report_json(path_in(cfg, "flow_check.json"), out.summary);
    return out;
}

ExperimentOutcome experiment_lemmas(const RunConfig& cfg) {
    json checks = json::array();
    bool pass = true;
    const auto record = [&](const std::string& name, const CheckResult& r, json params) {
        checks.push_back({{"check", name}, {"result", check_json(r, std::move(params))}});
        pass = pass && r.pass;
    };
    std::vector<double> cs = cfg.params.c_list;
    if (std::find(cs.begin(), cs.end(), 0.0) == cs.end()) cs.insert(cs.begin(), 0.0);
    for (double c : cs) {
        const double closed = gauss_integral_closed_form(c);
        const double quad = gauss_integral_quadrature(c, 1e-12);
        CheckResult r = make_check(std::abs(closed - quad) / closed, 1e-10, 0.0);
        record("gauss_integral", r, {{"c", c}, {"closed_form", closed}, {"quadrature", quad}});
        if (c > 0.0) {
            const AntiderivativeReport a = antiderivative_check(c);
            CheckResult ar = make_check(a.defect_quarter, 1e-6, 0.0);
            ar.pass = ar.pass && a.verdict == "c^2/4";
            record("antiderivative", ar, {{"c", c}, {"defect_half", number(a.defect_half)}, {"verdict", a.verdict}});
        }
    }
    for (double c : cfg.params.c_list)
        for (double p : cfg.params.p_list) {
            const KernelBoundReport k = kernel_bound_check(c, p, cfg.params.horizon, cfg.params.trials, cfg.seed);
            CheckResult r = make_check(k.empirical_ratio_max, k.l_bound, 1e-3);
            record("kernel_bound", r, {{"c", c}, {"p", p}, {"trials", cfg.params.trials}, {"q", k.q_best}});
        }
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (double p : cfg.params.p_list) {
        double worst = 0.0;
        bool all = true;
        for (int trial = 0; trial < 500; ++trial) {
            SampleMatrix m;
            m.rows = 4 + static_cast<int>(rng() % 29);
            m.cols = 1 + static_cast<int>(rng() % 32);
            m.dx = 0.1 + unit(rng);
            m.dy = 0.1 + unit(rng);
            for (int k = 0; k < m.rows * m.cols; ++k) m.data.push_back(unit(rng) < 0.2 ? 0.0 : unit(rng));
            const CheckResult r = minkowski_check(m, p);
            all = all && r.pass;
            if (r.rhs > 0.0) worst = std::max(worst, r.lhs / r.rhs);
        }
        // Worst lhs / rhs over the audit against 1.
        CheckResult summary = make_check(worst, 1.0, 1e-12);
        summary.pass = summary.pass && all;
        record("minkowski", summary, {{"p", p}, {"matrices", 500}});
    }
    ExperimentOutcome out;
    out.pass = pass;
    out.summary = {{"pass", pass}, {"checks", checks}};
    write_report_json(path_in(cfg, "lemmas.json"), out.summary);
    return out;
}

ExperimentOutcome run_experiment(const RunConfig& cfg) {
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + cfg.out_dir + ": " + ec.message());
    switch (cfg.experiment) {
        case ExperimentKind::Run: return experiment_run(cfg);
        case ExperimentKind::Cauchy: return experiment_cauchy(cfg);
        case ExperimentKind::Stability: return experiment_stability(cfg);
        case ExperimentKind::RelativeEnergy: return experiment_relative_energy(cfg);
        case ExperimentKind::Wminus14: return experiment_wminus14(cfg);
        case ExperimentKind::FlowCheck: return experiment_flow_check(cfg);
        case ExperimentKind::Lemmas: return experiment_lemmas(cfg);
    }
    throw Error(ErrorCode::BadParams, "unknown experiment");
}

}  // namespace densiflow
