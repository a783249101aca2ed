#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cmcflow/commands.hpp"
#include "cmcflow/errors.hpp"
#include "cmcflow/io.hpp"

#include "helpers.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace cmcflow;
using namespace test_helpers;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
    const std::string cmd =
        std::string(CMCFLOW_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

fs::path fresh_dir(const std::string& tag) {
    const fs::path p = fs::temp_directory_path() / ("cmcflow_test_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(bool(in));
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream split(line);
        std::string cell;
        while (std::getline(split, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

} // namespace

TEST_CASE("fmt17 round-trips doubles exactly") {
    for (double x : {0.0, -1.0, 1.0 / 3.0, 6.283185307179586, 1e-300, -3.5e17,
                     0.1234567890123456}) {
        CHECK(std::stod(fmt17(x)) == x);
    }
}

TEST_CASE("reference data files round-trip bit for bit") {
    const auto data = bumpy_data(16, 0.6, 7);
    const fs::path p = fresh_dir("refdata") / "data.txt";
    write_reference_data(p.string(), data);
    const auto back = read_reference_data(p.string());
    CHECK(back.grid == data.grid);
    CHECK(back.v == data.v);
    CHECK(back.lam1 == data.lam1);
    CHECK(back.lam2 == data.lam2);
    CHECK_THROWS_AS(read_reference_data((p.parent_path() / "absent.txt").string()),
                    IoError);
}

TEST_CASE("snapshots and trajectories round-trip bit for bit") {
    const fs::path dir = fresh_dir("snap");
    SurfaceSnapshot snap;
    snap.t = 1.25;
    snap.area = 39.478417604357434;
    snap.volume = -2.0 / 3.0;
    snap.h = 1.5231883791780083;
    snap.grid = {16, 16, kTwoPi, kTwoPi};
    snap.u.resize(snap.grid.size());
    for (std::size_t k = 0; k < snap.u.size(); ++k)
        snap.u[k] = std::sin(0.37 * static_cast<double>(k));
    write_snapshot((dir / "s.txt").string(), snap);
    const SurfaceSnapshot back = read_snapshot((dir / "s.txt").string());
    CHECK(back.t == snap.t);
    CHECK(back.area == snap.area);
    CHECK(back.volume == snap.volume);
    CHECK(back.h == snap.h);
    CHECK(back.grid == snap.grid);
    CHECK(back.u == snap.u);

    FlowHistory hist;
    for (int i = 0; i < 5; ++i) {
        FlowRecord r;
        r.t = 0.1 * i;
        r.area = 39.0 + i;
        r.volume = 55.0 - 1e-11 * i;
        r.h = 1.5 + 1e-3 * i;
        r.sup_dev = std::exp(-3.0 * r.t);
        r.min_theta = 1.0 - 1e-4 * i;
        r.max_a2 = 1.2;
        r.sq_dev = 1e-4 * std::exp(-6.0 * r.t);
        r.u_min = 0.9;
        r.u_max = 1.1;
        hist.push_back(r);
    }
    write_trajectory((dir / "t.csv").string(), hist);
    const FlowHistory back_h = read_trajectory((dir / "t.csv").string());
    REQUIRE(back_h.size() == hist.size());
    for (std::size_t i = 0; i < hist.size(); ++i) {
        CHECK(back_h[i].t == hist[i].t);
        CHECK(back_h[i].volume == hist[i].volume);
        CHECK(back_h[i].sq_dev == hist[i].sq_dev);
        CHECK(back_h[i].u_max == hist[i].u_max);
    }
}

TEST_CASE("key-value files round-trip through the run configuration") {
    RunConfig cfg;
    cfg.gen.kind = GeneratorKind::FourierBump;
    cfg.gen.amp1 = 0.55;
    cfg.gen.seed = 99;
    cfg.nx = 48;
    cfg.flow.dt_init = 2.5e-4;
    cfg.flow.scheme = TimeScheme::SemiImplicit;
    cfg.r = 0.7;
    cfg.checks = {"volume-drift", "eq-h"};
    const fs::path p = fresh_dir("kv") / "config.txt";
    write_key_values(p.string(), cfg.to_key_values());
    const RunConfig back = RunConfig::from_key_values(read_key_values(p.string()));
    CHECK(back.gen.kind == GeneratorKind::FourierBump);
    CHECK(back.gen.amp1 == cfg.gen.amp1);
    CHECK(back.gen.seed == cfg.gen.seed);
    CHECK(back.nx == cfg.nx);
    CHECK(back.flow.dt_init == cfg.flow.dt_init);
    CHECK(back.flow.scheme == TimeScheme::SemiImplicit);
    CHECK(back.r == cfg.r);
    CHECK(back.checks == cfg.checks);
}

TEST_CASE("foliate emits the closed-form leaf curve, reproducibly") {
    const fs::path dir = fresh_dir("foliate");
    const std::string args = "foliate --gen fuchsian --nx 16 --ny 16 --r-min -1 "
                             "--r-max 1 --r-count 5 --out " + dir.string();
    CHECK(run_cli(args) == 0);
    const auto rows = read_csv(dir / "leaves.csv");
    REQUIRE(rows.size() == 6);
    CHECK(rows[0][0] == "r");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double r = std::stod(rows[i][0]);
        const double h_direct = std::stod(rows[i][3]);
        const double h_formula = std::stod(rows[i][4]);
        CHECK(h_direct == doctest::Approx(2.0 * std::tanh(r)).epsilon(1e-12));
        CHECK(h_formula == doctest::Approx(h_direct).epsilon(1e-12));
    }

    const std::string first = slurp(dir / "leaves.csv");
    CHECK(run_cli(args) == 0);
    CHECK(slurp(dir / "leaves.csv") == first);
}

TEST_CASE("flow subcommand: stationary leaf converges immediately") {
    const fs::path dir = fresh_dir("flow_stationary");
    CHECK(run_cli("flow --gen fuchsian --nx 16 --ny 16 --r 1 --out " +
                  dir.string()) == 0);
    const auto oc = read_key_values((dir / "outcome.txt").string());
    CHECK(oc.at("status") == "converged");
    CHECK(std::stod(oc.at("c_limit")) ==
          doctest::Approx(2.0 * std::tanh(1.0)).epsilon(1e-12));
    CHECK(fs::exists(dir / "snapshot_final.txt"));
    CHECK(fs::exists(dir / "trajectory.csv"));
    CHECK(fs::exists(dir / "data.txt"));
}

TEST_CASE("flow, then check: a clean run passes every diagnostic") {
    const fs::path dir = fresh_dir("flow_check");
    CHECK(run_cli("flow --gen fuchsian --nx 32 --ny 32 --r 1 --perturb-amp 0.05 "
                  "--dt-init 1e-3 --record-every 10 --out " + dir.string()) == 0);
    CHECK(run_cli("check --out " + dir.string()) == 0);
    const auto rows = read_csv(dir / "checks.csv");
    REQUIRE(rows.size() >= 2);
    bool saw_pass = false;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK((rows[i][1] == "pass" || rows[i][1] == "skipped"));
        if (rows[i][1] == "pass") saw_pass = true;
    }
    CHECK(saw_pass);
}

TEST_CASE("check flags a volume-leaking run and keeps its exit code honest") {
    // Semi-implicit steps this coarse conserve volume only to ~1e-4, far
    // beyond the 1e-6 budget recorded in the config.
    const fs::path dir = fresh_dir("flow_leaky");
    const int rc = run_cli("flow --gen fuchsian --nx 16 --ny 16 --r 1 "
                           "--perturb-amp 0.3 --scheme semi-implicit "
                           "--dt-init 0.5 --record-every 1 --out " + dir.string());
    CHECK((rc == 0 || rc == 2));
    CHECK(run_cli("check --checks volume-drift --out " + dir.string()) == 2);
    const auto rows = read_csv(dir / "checks.csv");
    REQUIRE(rows.size() == 2);
    CHECK(rows[1][0] == "volume-drift");
    CHECK(rows[1][1] == "fail");
}

TEST_CASE("check on a directory without run artifacts exits with the I/O code") {
    const fs::path dir = fresh_dir("check_empty");
    CHECK(run_cli("check --out " + dir.string()) == 5);
}

TEST_CASE("interrupted flow resumes to the same limit") {
    const fs::path dir = fresh_dir("flow_resume");
    const std::string base = "flow --gen fuchsian --nx 16 --ny 16 --r 1 "
                             "--perturb-amp 0.1 --out ";
    CHECK(run_cli(base + dir.string() + " --t-max 0.5") == 2);
    CHECK(run_cli(base + dir.string() + " --resume") == 0);
    const auto oc = read_key_values((dir / "outcome.txt").string());

    const fs::path ref = fresh_dir("flow_straight");
    CHECK(run_cli(base + ref.string()) == 0);
    const auto oc_ref = read_key_values((ref / "outcome.txt").string());
    CHECK(std::stod(oc.at("c_limit")) ==
          doctest::Approx(std::stod(oc_ref.at("c_limit"))).epsilon(1e-6));
}

TEST_CASE("sweep recovers the leaf curvature curve with spectra") {
    const fs::path dir = fresh_dir("sweep");
    CHECK(run_cli("sweep --gen fuchsian --nx 16 --ny 16 --r-min -0.5 --r-max 0.5 "
                  "--r-count 3 --jobs 2 --out " + dir.string()) == 0);
    const auto rows = read_csv(dir / "sweep.csv");
    REQUIRE(rows.size() == 4);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double r = std::stod(rows[i][0]);
        const double c = std::stod(rows[i][1]);
        CHECK(rows[i][4] == "converged");
        CHECK(c == doctest::Approx(2.0 * std::tanh(r)).epsilon(1e-10));
        // constant-lambda bounds collapse onto the curve itself here
        CHECK(std::stod(rows[i][2]) == doctest::Approx(c).epsilon(1e-10));
        const double lam = std::stod(rows[i][5]);
        CHECK(lam == doctest::Approx(3.0 / std::pow(std::cosh(r), 2)).epsilon(1e-5));
    }
    CHECK(fs::exists(dir / "row_000" / "outcome.txt"));
    CHECK(fs::exists(dir / "row_002" / "snapshot_final.txt"));
}

TEST_CASE("stability subcommand reports the flat-leaf spectral gap") {
    const fs::path dir = fresh_dir("stability");
    CHECK(run_cli("stability --gen fuchsian --nx 32 --ny 32 --r 0 --out " +
                  dir.string()) == 0);
    const auto kv = read_key_values((dir / "stability.txt").string());
    CHECK(std::stod(kv.at("lambda_min")) == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(kv.at("strictly_stable") == "1");
    CHECK(fs::exists(dir / "eigenfunction.txt"));
}

TEST_CASE("config files feed the CLI and explicit flags win") {
    const fs::path dir = fresh_dir("cfgfile");
    {
        std::ofstream cfg(dir / "run.cfg");
        cfg << "nx=16\nny=16\nr-count=3\nr-min=-1\nr-max=1\n";
    }
    CHECK(run_cli("foliate --config " + (dir / "run.cfg").string() +
                  " --r-count 5 --out " + dir.string()) == 0);
    const auto rows = read_csv(dir / "leaves.csv");
    CHECK(rows.size() == 6);
    const auto kv = read_key_values((dir / "config.txt").string());
    CHECK(kv.at("nx") == "16");
    CHECK(kv.at("r-count") == "5");
}

TEST_CASE("unknown generators and schemes exit with the usage code") {
    const fs::path dir = fresh_dir("badargs");
    CHECK(run_cli("flow --gen nonsense --out " + dir.string()) == 4);
    CHECK(run_cli("flow --gen fuchsian --scheme dg --out " + dir.string()) == 4);
    CHECK(run_cli("flow --gen fuchsian --nx 16 --ny 16") == 4);
}
