#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "bbmdg/runner.hpp"

using namespace bbmdg;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("bbmdg_test_" + name);
    fs::remove_all(dir);
    return dir;
}

} // namespace

TEST(Config, MinimalSolitonDefaults)
{
    const RunConfig cfg = parse_config("problem = soliton\n");
    EXPECT_EQ(cfg.problem, Problem::soliton);
    EXPECT_EQ(cfg.scheme, Scheme::DG1);
    EXPECT_FALSE(cfg.moving_mesh);
    EXPECT_EQ(cfg.transfer, TransferKind::interpolate);
    EXPECT_EQ(cfg.M, 200u);
    EXPECT_DOUBLE_EQ(cfg.dt, 0.1);
    EXPECT_DOUBLE_EQ(cfg.t_end, 50.0);
    EXPECT_DOUBLE_EQ(cfg.wave.c, 3.0);
    EXPECT_DOUBLE_EQ(cfg.wave.L, 200.0);
    EXPECT_DOUBLE_EQ(cfg.solver.newton_tol, 1e-12);
    EXPECT_EQ(cfg.steps(), 500u);
    EXPECT_EQ(cfg.basis(), BasisKind::CubicLagrange);
}

TEST(Config, SchemeDefaults)
{
    const RunConfig dg2 = parse_config("scheme = DG2\n");
    EXPECT_EQ(dg2.transfer, TransferKind::conservative);
    EXPECT_EQ(dg2.basis(), BasisKind::PeriodicCubicBSpline);
    EXPECT_EQ(dg2.hamiltonian(), Hamiltonian::H2);
    EXPECT_EQ(parse_config("scheme = DG2\ntransfer = interpolate\n").transfer, TransferKind::interpolate);
    EXPECT_EQ(parse_config("scheme = tr").hamiltonian(), Hamiltonian::H1);
}

TEST(Config, Errors)
{
    EXPECT_THROW(parse_config("scheme = DG1\nbasis = bspline\n"), ConfigError);
    EXPECT_THROW(parse_config("dt = -1\n"), ConfigError);
    EXPECT_THROW(parse_config("c = 0.5\n"), ConfigError);
    EXPECT_THROW(parse_config("M = abc\n"), ConfigError);
    EXPECT_THROW(parse_config("frobnicate = 1\n"), ConfigError);
    EXPECT_THROW(parse_config("deboor_relaxation = 0\n"), ConfigError);
    EXPECT_THROW(parse_config("deboor_relaxation = 1.5\n"), ConfigError);
    EXPECT_DOUBLE_EQ(parse_config("deboor_relaxation = 1\n").equidistribution.relaxation, 1.0);
    EXPECT_THROW(parse_config("just text\n"), ConfigError);
    try {
        parse_config("# comment\n\nM = 3x\n");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
    try {
        parse_config("", {"dt=0"});
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("override 1"), std::string::npos) << e.what();
    }
}

TEST(Config, OverridesApplyInOrder)
{
    const RunConfig cfg = parse_config("M = 10\ndt = 0.5\n", {"M=20", "M=30", "snapshot_times=0, 1.5"});
    EXPECT_EQ(cfg.M, 30u);
    EXPECT_DOUBLE_EQ(cfg.dt, 0.5);
    ASSERT_EQ(cfg.snapshot_times.size(), 2u);
    EXPECT_DOUBLE_EQ(cfg.snapshot_times[1], 1.5);
}

TEST(Runner, ZeroEndTime)
{
    const fs::path dir = scratch("t0");
    RunConfig cfg = parse_config("M = 20\nt_end = 0\nsnapshot_times = 0\n");
    cfg.output_dir = dir.string();
    const auto r = run(cfg);
    EXPECT_EQ(r.status, ExitStatus::ok);
    ASSERT_EQ(r.series.size(), 1u);
    EXPECT_EQ(r.snapshot_files, std::vector<std::string>{"snapshot_0.csv"});
    EXPECT_TRUE(fs::exists(dir / "snapshot_0.csv"));
    std::istringstream series(slurp(dir / "series.csv"));
    std::string line;
    int lines = 0;
    while (std::getline(series, line)) {
        ++lines;
    }
    EXPECT_EQ(lines, 2);
}

TEST(Runner, ShortMovingRunsConserve)
{
    for (const char* scheme : {"DG1", "DG2"}) {
        RunConfig cfg = parse_config(std::string("scheme = ") + scheme +
                                     "\nmoving_mesh = true\nM = 60\nL = 30\nt_end = 1\n");
        cfg.output_dir.clear();
        const auto r = run(cfg);
        ASSERT_EQ(r.status, ExitStatus::ok) << r.message;
        ASSERT_EQ(r.series.size(), 11u);
        EXPECT_TRUE(r.meshes_ordered);
        const bool first = std::string(scheme) == "DG1";
        const double I0 = first ? r.series.front().H1 : r.series.front().H2;
        for (const auto& row : r.series) {
            EXPECT_NEAR(first ? row.H1 : row.H2, I0, 1e-10 * std::abs(I0)) << scheme << " t=" << row.t;
        }
        // The mesh actually moved.
        EXPECT_NE(r.meshes.back().second, r.meshes.front().second);
    }
}

TEST(Runner, DeterministicOutput)
{
    const fs::path a = scratch("det_a");
    const fs::path b = scratch("det_b");
    for (const auto& dir : {a, b}) {
        RunConfig cfg = parse_config("scheme = DG2\nmoving_mesh = true\nM = 40\nL = 30\nt_end = 0.5\n"
                                     "snapshot_times = 0.5\n");
        cfg.output_dir = dir.string();
        ASSERT_EQ(run(cfg).status, ExitStatus::ok);
    }
    for (const char* f : {"series.csv", "mesh.csv", "snapshot_0.5.csv"}) {
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
        EXPECT_FALSE(slurp(a / f).empty()) << f;
    }
}

TEST(Runner, SolverFailureWritesSnapshot)
{
    const fs::path dir = scratch("fail");
    RunConfig cfg = parse_config("M = 20\nL = 30\nt_end = 1\nmax_newton_iters = 1\ndt = 0.5\n");
    cfg.output_dir = dir.string();
    const auto r = run(cfg);
    EXPECT_EQ(r.status, ExitStatus::solver_failure);
    EXPECT_NE(r.message.find("step 1"), std::string::npos) << r.message;
    EXPECT_TRUE(fs::exists(dir / "snapshot_failure.csv"));
}

TEST(Cli, ExitCodes)
{
    const fs::path dir = scratch("cli");
    fs::create_directories(dir);
    {
        std::ofstream(dir / "ok.cfg") << "M = 20\nt_end = 0.2\noutput_dir = " << (dir / "out").string() << "\n";
        std::ofstream(dir / "bad.cfg") << "scheme = DG1\nbasis = bspline\n";
    }
    const std::string cli = BBMDG_CLI_PATH;
    auto status = [](const std::string& cmd) {
        const int rc = std::system((cmd + " > /dev/null 2>&1").c_str());
        return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    };
    EXPECT_EQ(status(cli + " run --quiet " + (dir / "ok.cfg").string()), 0);
    EXPECT_TRUE(fs::exists(dir / "out" / "series.csv"));
    EXPECT_EQ(status(cli + " run " + (dir / "bad.cfg").string()), 1);
    EXPECT_EQ(status(cli + " run " + (dir / "missing.cfg").string()), 1);
    EXPECT_EQ(status(cli + " run --quiet " + (dir / "ok.cfg").string() + " --override dt=-1"), 1);
    EXPECT_EQ(status(cli + " run --quiet " + (dir / "ok.cfg").string() +
                     " --override max_newton_iters=1 --override dt=2 --override t_end=4"), 2);
}
