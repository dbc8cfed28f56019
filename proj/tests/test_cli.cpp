#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "ctedge/errors.hpp"
#include "run_config.hpp"

using ctedge::ConfigError;
using ctedge::cli::RunConfig;
using ctedge::cli::parse_config_text;
namespace fs = std::filesystem;

namespace {

fs::path test_dir() {
    static const fs::path dir = [] {
        const fs::path d = fs::temp_directory_path() / "ctedge_cli_test";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void spit(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    REQUIRE(out.good());
}

int run_cli(const std::string& args) {
    const std::string cmd =
        std::string(CTEDGE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

nlohmann::json read_json(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    return nlohmann::json::parse(in);
}

} // namespace

TEST_CASE("config text parses values, comments, and lists") {
    const RunConfig cfg = parse_config_text(
        "# experiment\n"
        "noise.sigma = 2.5   # trailing comment\n"
        "kernel.name = \"bspline3\"\n"
        "statistic = linear\n"
        "scan.noiseless = true\n"
        "sigma_grid = [0.5, 1.0, 2.0]\n"
        "n_null = 500\n");
    CHECK(cfg.noise_sigma == 2.5);
    CHECK(cfg.kernel_name == "bspline3");
    CHECK(cfg.statistic == "linear");
    CHECK(cfg.scan_noiseless);
    REQUIRE(cfg.sigma_grid.size() == 3);
    CHECK(cfg.sigma_grid[1] == 1.0);
    CHECK(cfg.n_null == 500);
    // Untouched keys keep their defaults.
    CHECK(cfg.grid_epsilon == 0.007);
    CHECK(cfg.n_alt == 10000);
}

TEST_CASE("config text rejects malformed input") {
    CHECK_THROWS_AS(parse_config_text("bogus.key = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("rho = 3\nrho = 4\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("rho = banana\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("n_null = 1.5\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("rho\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("statistic = \"cubic\"\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("noise.vartheta = \"exotic\"\n"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config_text("alpha = 1.5\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("disks = [0, 0, 0.3]\n"), ConfigError);
    // raw per-sample std and a vartheta scaling contradict each other.
    CHECK_THROWS_AS(parse_config_text("noise.raw_std = true\n"
                                      "noise.vartheta = \"sqrt-eps-over-kappa\"\n"),
                    ConfigError);
    // The error message names the offending key.
    try {
        parse_config_text("bogus.key = 1\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("bogus.key") != std::string::npos);
    }
}

TEST_CASE("config hash tracks content, not output location") {
    RunConfig a, b;
    CHECK(a.hash() == b.hash());
    CHECK(a.hash().size() == 16);

    b.out_dir = "somewhere/else";
    CHECK(a.hash() == b.hash()); // plumbing does not change identity

    b = a;
    b.noise_sigma = 2.0;
    CHECK(a.hash() != b.hash());

    b = a;
    b.seed = 77;
    CHECK(a.hash() != b.hash());
}

TEST_CASE("builders translate config fields into domain objects") {
    RunConfig cfg;
    cfg.statistic = "sign";
    cfg.test_sigma = 0.5;
    const auto edge = cfg.edge();
    CHECK(edge.x0.x == doctest::Approx(0.345));
    CHECK(edge.x0.y == doctest::Approx(-0.1));
    CHECK(edge.delta_f == doctest::Approx(-1.0));
    CHECK(cfg.weight_1d() == ctedge::Weight1d::sign);
    // test_sigma overrides only the test-side noise model.
    const auto grid = cfg.grid();
    CHECK(cfg.noise().std_dev(0, 0, grid) ==
          doctest::Approx(std::sqrt(3.0) * std::sqrt(grid.delta_alpha())));
    CHECK(cfg.test_noise().std_dev(0, 0, grid) ==
          doctest::Approx(0.5 * std::sqrt(grid.delta_alpha())));

    cfg.statistic = "2d";
    CHECK_THROWS_AS(cfg.weight_1d(), ConfigError);

    RunConfig scaled;
    scaled.noise_vartheta = "sqrt-eps-over-kappa";
    CHECK(scaled.noise().std_dev(0, 0, grid) ==
          doctest::Approx(std::sqrt(3.0) * grid.epsilon));
}

TEST_CASE("repro fig3 is byte-identical across runs and directories") {
    const fs::path d1 = test_dir() / "det1";
    const fs::path d2 = test_dir() / "det2";
    REQUIRE(run_cli("repro fig3 --out " + d1.string()) == 0);
    REQUIRE(run_cli("repro fig3 --out " + d2.string()) == 0);
    for (const char* name : {"fig3_hist.csv", "fig3_pdf.csv", "fig3_roc.csv"}) {
        const std::string a = slurp(d1 / "fig3" / name);
        CHECK(a == slurp(d2 / "fig3" / name));
        CHECK(a.rfind("# config=", 0) == 0); // provenance header first
        CHECK(a.find("seed=1") != std::string::npos);
    }
    // A different seed changes the replicate-bearing artifacts.
    const fs::path d3 = test_dir() / "det3";
    REQUIRE(run_cli("repro fig3 --out " + d3.string() + " --seed 9") == 0);
    CHECK(slurp(d1 / "fig3" / "fig3_hist.csv") !=
          slurp(d3 / "fig3" / "fig3_hist.csv"));
}

TEST_CASE("noiseless test2d equals its noncentrality and rejects") {
    const fs::path cfg = test_dir() / "noiseless.cfg";
    spit(cfg, "noise.sigma = 0\ntest.sigma = 0.5\n");
    const fs::path out = test_dir() / "t2";
    REQUIRE(run_cli("test2d --config " + cfg.string() + " --out " +
                    out.string()) == 0);
    const auto j = read_json(out / "test2d.json");
    CHECK(j["statistic"].get<double>() ==
          j["noncentrality_observed"].get<double>());
    CHECK(j["reject"].get<bool>());
    CHECK(j["threshold"].get<double>() == doctest::Approx(5.9915).epsilon(1e-4));
}

TEST_CASE("exit codes classify config, precondition, and numerical errors") {
    const fs::path bad = test_dir() / "bad.cfg";
    spit(bad, "bogus.key = 1\n");
    CHECK(run_cli("simulate --config " + bad.string()) == 2);

    CHECK(run_cli("repro fig99 --out " + (test_dir() / "x").string()) == 2);
    CHECK(run_cli("frobnicate") == 2);

    const fs::path few = test_dir() / "few.cfg";
    spit(few, "n_null = 10\nn_alt = 10\n");
    CHECK(run_cli("roc --config " + few.string() + " --out " +
                  (test_dir() / "x").string()) == 3);

    // sigma identically zero makes the test covariance singular.
    const fs::path sing = test_dir() / "sing.cfg";
    spit(sing, "noise.sigma = 0\n");
    CHECK(run_cli("test2d --config " + sing.string() + " --out " +
                  (test_dir() / "x").string()) == 1);
}

TEST_CASE("power-curve reports the 2D test at least as powerful as 1D") {
    const fs::path cfg = test_dir() / "power.cfg";
    spit(cfg, "sigma_grid = [0.5, 1.5, 4.5, 13.5]\n");
    const fs::path out = test_dir() / "pw";
    REQUIRE(run_cli("power-curve --config " + cfg.string() + " --out " +
                    out.string()) == 0);
    std::istringstream csv(slurp(out / "power_vs_sigma.csv"));
    std::string line;
    std::getline(csv, line); // provenance
    std::getline(csv, line); // header
    CHECK(line == "sigma,power_1d,power_2d,alpha");
    int rows = 0;
    while (std::getline(csv, line)) {
        double sigma = 0.0, p1 = 0.0, p2 = 0.0, alpha = 0.0;
        REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &sigma, &p1, &p2,
                            &alpha) == 4);
        CHECK(p2 >= p1);
        CHECK(p1 >= alpha - 1e-12);
        ++rows;
    }
    CHECK(rows == 4);
}

TEST_CASE("summary JSON embeds the exact resolved config") {
    const fs::path cfg = test_dir() / "echo.cfg";
    spit(cfg, "noise.sigma = 1.25\nrho = 2.5\nseed = 4\n");
    const fs::path out = test_dir() / "echo";
    REQUIRE(run_cli("simulate --config " + cfg.string() + " --out " +
                    out.string()) == 0);
    const auto j = read_json(out / "summary.json");
    CHECK(j["config"]["noise"]["sigma"].get<double>() == 1.25);
    CHECK(j["config"]["rho"].get<double>() == 2.5);
    CHECK(j["seed"].get<int>() == 4);
    CHECK(j["config_hash"].get<std::string>().size() == 16);
    // The CLI seed override wins over the config file.
    const fs::path out2 = test_dir() / "echo2";
    REQUIRE(run_cli("simulate --config " + cfg.string() + " --out " +
                    out2.string() + " --seed 11") == 0);
    CHECK(read_json(out2 / "summary.json")["seed"].get<int>() == 11);
}
