#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "densiflow/config.hpp"
#include "densiflow/error.hpp"
#include "densiflow/experiments.hpp"
#include "densiflow/io.hpp"
#include "densiflow/svg.hpp"

using namespace densiflow;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(const std::function<void()>& f, std::string* what = nullptr) {
    try {
        f();
    } catch (const Error& e) {
        if (what) *what = e.what();
        return e.code();
    }
    ADD_FAILURE() << "no exception";
    return ErrorCode::IoError;
}

class TempDir : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("densiflow_") + info->test_suite_name() + "_" + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    [[nodiscard]] std::string path(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

/// A random configuration that passes validation.
std::string random_config_text(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::ostringstream out;
    const int n = 1 << (3 + static_cast<int>(u(rng) * 5));
    out << "grid.n = " << n << "\n";
    if (u(rng) < 0.5) out << "grid.length = " << format_double(1.0 + 10.0 * u(rng)) << "\n";
    out << "solver.nu = " << format_double(1e-3 + u(rng)) << "\n";
    if (u(rng) < 0.5)
        out << "solver.dt = " << format_double(1e-4 + 1e-2 * u(rng)) << "\n";
    else
        out << "solver.cfl = " << format_double(0.05 + 0.9 * u(rng)) << "\n";
    const double T = 0.5 + 2.0 * u(rng);
    out << "solver.T = " << format_double(T) << "\n";
    out << "solver.snapshot_stride = " << 1 + static_cast<int>(20 * u(rng)) << "\n";
    out << "solver.pressure_tol = " << format_double(1e-12 + 9e-7 * u(rng)) << "\n";
    out << "solver.density_interp = " << (u(rng) < 0.5 ? "bilinear" : "clamped_spline") << "\n";
    const double c0 = 0.1 + 0.4 * u(rng);
    const double C0 = 1.0 + 3.0 * u(rng);
    out << "bounds.c0 = " << format_double(c0) << "\nbounds.C0 = " << format_double(C0) << "\n";
    const char* kinds[] = {"taylor_green", "constant_velocity", "random_bandlimited", "density_blob_mix"};
    out << "initial.kind = " << kinds[static_cast<int>(u(rng) * 4)] << "\n";
    out << "initial.seed = " << rng() << "\n";
    out << "initial.amplitude = " << format_double(u(rng) * 3) << "\n";
    out << "initial.kmax = " << 1 + static_cast<int>(u(rng) * ((n - 1) / 3 - 1)) << "\n";
    out << "initial.rho_kmax = " << 1 + static_cast<int>(u(rng) * ((n - 1) / 3 - 1)) << "\n";
    out << "initial.rho_lo = " << format_double(c0 + 0.01) << "\n";
    out << "initial.rho_hi = " << format_double(C0 - 0.01 * u(rng)) << "\n";
    out << "initial.blob_width = " << format_double(0.1 + u(rng)) << "\n";
    const char* experiments[] = {"run", "cauchy", "stability", "relative-energy", "wminus14", "flow-check", "lemmas"};
    out << "experiment.kind = " << experiments[static_cast<int>(u(rng) * 7)] << "\n";
    out << "experiment.levels = 1, " << 2 + static_cast<int>(u(rng) * 5) << ", 32\n";
    out << "experiment.s_list = " << format_double(0.99 * T * u(rng) + 1e-3) << ", " << format_double(T) << "\n";
    out << "experiment.times = " << format_double(T * (0.1 + 0.8 * u(rng))) << "\n";
    out << "experiment.kappa = " << format_double(0.5 + u(rng)) << "\n";
    out << "experiment.c_list = 0, " << format_double(u(rng) * 4) << "\n";
    out << "experiment.p_list = " << format_double(1.0 + 1e-3 + 4 * u(rng)) << "\n";
    out << "experiment.trials = " << 1 + static_cast<int>(u(rng) * 500) << "\n";
    out << "output.dir = out/run_" << static_cast<int>(u(rng) * 1000) << "\n";
    return out.str();
}

}  // namespace

TEST(Config, EmptyDocumentGivesDefaults) {
    const RunConfig c = parse_config("");
    EXPECT_EQ(c.grid.n, 128);
    EXPECT_DOUBLE_EQ(c.grid.length, kTwoPi);
    ASSERT_TRUE(c.solver.cfl.has_value());
    EXPECT_DOUBLE_EQ(*c.solver.cfl, 0.4);
    EXPECT_FALSE(c.solver.dt.has_value());
    EXPECT_DOUBLE_EQ(c.solver.bounds.c0, 0.5);
    EXPECT_DOUBLE_EQ(c.solver.bounds.C0, 2.0);
}

TEST(Config, CommentsAndWhitespace) {
    const RunConfig c = parse_config("# header\n  solver.nu = 0.1   # viscosity\n\n grid.n=64\n");
    EXPECT_DOUBLE_EQ(c.solver.nu, 0.1);
    EXPECT_EQ(c.grid.n, 64);
}

TEST(Config, FixedStepReplacesCfl) {
    const RunConfig c = parse_config("solver.dt = 0.001\n");
    EXPECT_TRUE(c.solver.dt.has_value());
    EXPECT_FALSE(c.solver.cfl.has_value());
    EXPECT_EQ(code_of([] { parse_config("solver.dt = 0.001\nsolver.cfl = 0.3\n"); }), ErrorCode::ValidationError);
}

TEST(Config, NegativeViscosityNamesTheKey) {
    std::string what;
    EXPECT_EQ(code_of([] { parse_config("solver.nu = -1\n"); }, &what), ErrorCode::ValidationError);
    EXPECT_EQ(what.rfind("ValidationError: solver.nu", 0), 0u) << what;
}

TEST(Config, StrictParsing) {
    std::string what;
    EXPECT_EQ(code_of([] { parse_config("solver.nu = 0.1\nsolver.viscosity = 0.1\n"); }, &what),
              ErrorCode::ValidationError);
    EXPECT_NE(what.find("solver.viscosity"), std::string::npos);
    EXPECT_NE(what.find("line 2"), std::string::npos);

    EXPECT_EQ(code_of([] { parse_config("grid.n = 64\ngrid.n = 32\n"); }, &what), ErrorCode::ParseError);
    EXPECT_NE(what.find("line 2"), std::string::npos);
    EXPECT_EQ(code_of([] { parse_config("\n\njust words\n"); }, &what), ErrorCode::ParseError);
    EXPECT_NE(what.find("line 3"), std::string::npos);
    EXPECT_EQ(code_of([] { parse_config("= 3\n"); }), ErrorCode::ParseError);
    EXPECT_EQ(code_of([] { parse_config("grid.n =\n"); }), ErrorCode::ParseError);
    EXPECT_EQ(code_of([] { parse_config("grid.n = 64x\n"); }), ErrorCode::ValidationError);
    EXPECT_EQ(code_of([] { parse_config("grid.n = 48\n"); }), ErrorCode::ValidationError);
    EXPECT_EQ(code_of([] { parse_config("solver.T = nan\n"); }), ErrorCode::ValidationError);
    EXPECT_EQ(code_of([] { parse_config("initial.kind = vortex\n"); }), ErrorCode::ValidationError);
    EXPECT_EQ(code_of([] { parse_config("experiment.levels = 1, 2, 2\n"); }), ErrorCode::ValidationError);
    EXPECT_EQ(code_of([] { parse_config("solver.pressure_tol = 1e-3\n"); }), ErrorCode::ValidationError);
}

TEST(Config, RoundTripOverRandomConfigs) {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        const std::string text = random_config_text(rng);
        RunConfig cfg;
        ASSERT_NO_THROW(cfg = parse_config(text)) << text;
        const std::string once = serialize(cfg);
        const std::string twice = serialize(parse_config(once));
        ASSERT_EQ(once, twice) << text;
    }
}

TEST(Config, SerializeListsEveryActiveKey) {
    const std::string text = serialize(parse_config(""));
    for (const std::string& key : config_keys()) {
        if (key == "solver.dt") {
            EXPECT_EQ(text.find(key + " ="), std::string::npos);
            continue;
        }
        EXPECT_NE(text.find(key + " ="), std::string::npos) << key;
    }
}

TEST(Config, FormatDoubleRoundTrips) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int k = 0; k < 1000; ++k) {
        const double v = u(rng) * std::pow(10.0, k % 40 - 20);
        EXPECT_EQ(std::stod(format_double(v)), v);
    }
    EXPECT_EQ(format_double(0.1), "0.1");
}

TEST_F(TempDir, LoadConfigMissingFile) {
    EXPECT_EQ(code_of([&] { load_config(path("absent.cfg")); }), ErrorCode::IoError);
}

TEST_F(TempDir, FieldRoundTripIsBitExact) {
    const GridSpec g = GridSpec::make(16, 3.7);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd;
    std::vector<double> a(g.size()), b(g.size());
    for (double& v : a) v = nd(rng) * 1e3;
    for (double& v : b) v = nd(rng) * 1e-9;
    const ScalarField f(g, a);
    write_field(path("f.dfl"), f);
    const ScalarField back = read_scalar_field(path("f.dfl"));
    EXPECT_EQ(back.grid(), g);
    EXPECT_EQ(std::memcmp(back.data(), f.data(), g.size() * sizeof(double)), 0);

    const VectorField2 v(ScalarField(g, a), ScalarField(g, b));
    write_field(path("v.dfl"), v);
    const VectorField2 vb = read_vector_field(path("v.dfl"));
    EXPECT_EQ(std::memcmp(vb.x.data(), v.x.data(), g.size() * sizeof(double)), 0);
    EXPECT_EQ(std::memcmp(vb.y.data(), v.y.data(), g.size() * sizeof(double)), 0);
    EXPECT_EQ(read_field(path("v.dfl")).components.size(), 2u);
    EXPECT_EQ(code_of([&] { read_vector_field(path("f.dfl")); }), ErrorCode::FormatError);
}

TEST_F(TempDir, CorruptFieldFiles) {
    const ScalarField f(GridSpec::make(8), 1.25);
    write_field(path("f.dfl"), f);
    const std::string bytes = slurp(path("f.dfl"));
    for (std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{10}, bytes.size() - 1}) {
        std::ofstream(path("t.dfl"), std::ios::binary).write(bytes.data(), static_cast<std::streamsize>(cut));
        EXPECT_EQ(code_of([&] { read_field(path("t.dfl")); }), ErrorCode::FormatError) << cut;
    }
    std::string bad = bytes;
    bad[0] = 'X';
    std::ofstream(path("m.dfl"), std::ios::binary) << bad;
    EXPECT_EQ(code_of([&] { read_field(path("m.dfl")); }), ErrorCode::FormatError);
    std::ofstream(path("long.dfl"), std::ios::binary) << bytes << "extra";
    EXPECT_EQ(code_of([&] { read_field(path("long.dfl")); }), ErrorCode::FormatError);
    EXPECT_EQ(code_of([&] { read_field(path("missing.dfl")); }), ErrorCode::IoError);
}

TEST_F(TempDir, DiagnosticsCsvHasOneRowPerStep) {
    const GridSpec g = GridSpec::make(16);
    SolverConfig cfg;
    cfg.dt = 0.01;
    cfg.cfl.reset();
    cfg.T = 0.03;
    const Trajectory tr = run(ScalarField(g, 1.0), VectorField2(g, 0.5, 0.0), cfg);
    write_diagnostics_csv(path("d.csv"), tr);
    std::istringstream in(slurp(path("d.csv")));
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line)) lines.push_back(line);
    ASSERT_EQ(lines.size(), 4u);
    EXPECT_EQ(lines[0], "t,kinetic,dissipation_cum,grad_u_inf,u_inf,cg_iters");
    for (std::size_t k = 1; k < lines.size(); ++k)
        EXPECT_EQ(std::count(lines[k].begin(), lines[k].end(), ','), 5) << lines[k];
}

TEST_F(TempDir, CsvJsonAndSvgWriters) {
    write_csv(path("a.csv"), {"x", "y"}, {{1.0, 0.1}, {2.0, 1e-300}});
    EXPECT_EQ(slurp(path("a.csv")), "x,y\n1,0.1\n2,1e-300\n");
    write_report_json(path("r.json"), nlohmann::json{{"pass", true}, {"value", 0.5}});
    const nlohmann::json back = nlohmann::json::parse(slurp(path("r.json")));
    EXPECT_EQ(back["pass"], true);
    write_svg_plot(path("p.svg"), {"gap <t>", "t", "gap", true}, {{"a&b", {0.0, 1.0, 2.0}, {1e-3, 1e-5, 0.0}}});
    const std::string svg = slurp(path("p.svg"));
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    EXPECT_NE(svg.find("a&amp;b"), std::string::npos);
    EXPECT_NE(svg.find("gap &lt;t&gt;"), std::string::npos);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
    EXPECT_EQ(code_of([&] { write_text(path("no/such/dir/x.txt"), "x"); }), ErrorCode::IoError);
}

TEST_F(TempDir, RunExperimentWritesArtifacts) {
    RunConfig cfg = parse_config(
        "grid.n = 16\nsolver.dt = 0.01\nsolver.T = 0.05\nsolver.snapshot_stride = 2\n"
        "initial.kind = random_bandlimited\ninitial.kmax = 4\nexperiment.s_list = 0.05\n"
        "experiment.times = 0.05\n");
    cfg.out_dir = path("out");
    const ExperimentOutcome o = run_experiment(cfg);
    EXPECT_TRUE(o.pass);
    for (const char* name : {"rho_0000.dfl", "u_0000.dfl", "p_0000.dfl", "trajectory.meta.json", "diagnostics.csv",
                             "run.json", "energy_gap.svg"})
        EXPECT_TRUE(fs::exists(dir_ / "out" / name)) << name;
    const nlohmann::json meta = nlohmann::json::parse(slurp(path("out/trajectory.meta.json")));
    EXPECT_TRUE(meta.contains("times"));
    const ScalarField rho0 = read_scalar_field(path("out/rho_0000.dfl"));
    EXPECT_EQ(rho0.n(), 16);
}
