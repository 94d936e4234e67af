#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "noisycw/config.hpp"
#include "noisycw/manifest.hpp"

namespace fs = std::filesystem;
using namespace noisycw;

namespace {

const char* kFullConfig = R"({
  "system": {"t1_ns": 0.34, "t2_ns": 0.5},
  "field": {"rabi_mean_rad_ns": 0.1, "detuning_rad_ns": 0.02},
  "noise": {"tau_c_ns": 4.0, "var_domega_rad2_ns2": 0.01, "var_de_rel": 1.0,
            "epsilon": 0.8},
  "hom": {"delay_ns": 43.0, "gamma_l_inv_ns": 0.05},
  "ensemble": {"n_traj": 64, "seed": 9, "n_starts": 4},
  "grid": {"tau_max_ns": 10.0, "step_ns": 0.5},
  "outputs": ["g1_rotating", "g2"]
})";

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(bool(in));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct CliFixture {
    fs::path dir;
    std::string bin;

    CliFixture() {
        const char* env = std::getenv("NOISYCW_BIN");
        if (env) bin = env;
        dir = fs::temp_directory_path() /
              ("noisycw_cli_" + std::to_string(::getpid()));
        fs::create_directories(dir);
    }
    ~CliFixture() {
        std::error_code ec;
        fs::remove_all(dir, ec);
    }

    fs::path write_config(const std::string& name, const std::string& text) const {
        const fs::path p = dir / name;
        std::ofstream out(p);
        out << text;
        return p;
    }

    int run(const std::string& args, const std::string& tag) const {
        const std::string cmd = bin + " " + args + " >" + (dir / (tag + ".out")).string() +
                                " 2>" + (dir / (tag + ".err")).string();
        const int rc = std::system(cmd.c_str());
        return rc < 0 ? rc : WEXITSTATUS(rc);
    }
};

}  // namespace

TEST_CASE("full configuration parses and echoes losslessly") {
    const RunConfig c = RunConfig::from_json_text(kFullConfig);
    CHECK(c.system.t1 == 0.34);
    CHECK(c.system.t2 == 0.5);
    CHECK(c.field.rabi_mean == 0.1);
    CHECK(c.field.detuning == 0.02);
    CHECK(c.field.lab_freq == 0.0);
    CHECK(c.noise.tau_c == 4.0);
    CHECK(c.noise.epsilon == 0.8);
    REQUIRE(c.hom.has_value());
    CHECK(c.hom->delay == 43.0);
    CHECK(c.hom->gamma_l == 0.05);
    CHECK(c.hom->r_int == 0.5);
    CHECK(c.ensemble.n_traj == 64);
    CHECK(c.ensemble.seed == 9);
    CHECK(c.ensemble.equil == -1.0);
    REQUIRE(c.outputs.size() == 2);
    CHECK(c.outputs[0] == SeriesKind::g1_rotating);
    CHECK(c.grid.resolve().size() == 21);

    const std::string echoed = c.echo();
    CHECK(echoed.find('\n') == std::string::npos);
    const RunConfig back = RunConfig::from_json_text(echoed);
    CHECK(back.system.t1 == c.system.t1);
    CHECK(back.noise.var_domega == c.noise.var_domega);
    CHECK(back.hom->delay == c.hom->delay);
    CHECK(back.ensemble.seed == c.ensemble.seed);
    CHECK(back.grid.tau_max == c.grid.tau_max);
    CHECK(back.outputs == c.outputs);
}

TEST_CASE("configuration errors carry the field path") {
    auto expect_throw = [](const std::string& text, const std::string& needle) {
        try {
            RunConfig::from_json_text(text);
            FAIL_CHECK("expected a validation_error for: " << needle);
        } catch (const validation_error& e) {
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
    };

    expect_throw(R"({"system": {"t1_ns": 1.0, "bogus": 2},
                     "field": {"rabi_mean_rad_ns": 1}, "grid": {"tau_max_ns": 1, "step_ns": 0.5}})",
                 "system.bogus");
    expect_throw(R"({"system": {"t1_ns": 1.0},
                     "field": {"rabi_mean_rad_ns": 1}, "grid": {"tau_max_ns": 1, "step_ns": 0.5}})",
                 "system.t2_ns");
    expect_throw(R"({"system": {"t1_ns": "x", "t2_ns": 1.0},
                     "field": {"rabi_mean_rad_ns": 1}, "grid": {"tau_max_ns": 1, "step_ns": 0.5}})",
                 "expected a number");
    expect_throw(R"({"system": {"t1_ns": 1.0, "t2_ns": 1.0},
                     "field": {"rabi_mean_rad_ns": 1},
                     "grid": {"tau_max_ns": 1, "step_ns": 0.5},
                     "outputs": ["nonsense"]})",
                 "nonsense");
    expect_throw("[1, 2]", "JSON object");
    expect_throw("{", "parse error");
    // physical validation still applies after parsing
    expect_throw(R"({"system": {"t1_ns": 1.0, "t2_ns": 3.0},
                     "field": {"rabi_mean_rad_ns": 1},
                     "grid": {"tau_max_ns": 1, "step_ns": 0.5}})",
                 "t2");
}

TEST_CASE("grid requests resolve to delay lists") {
    GridSpec uniform;
    uniform.tau_max = 2.0;
    uniform.step = 0.5;
    const std::vector<double> g = uniform.resolve();
    REQUIRE(g.size() == 5);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == doctest::Approx(2.0));

    GridSpec listed;
    listed.delays = {-1.0, 0.0, 2.5};
    CHECK(listed.resolve() == listed.delays);

    GridSpec decreasing;
    decreasing.delays = {0.0, 1.0, 1.0};
    CHECK_THROWS_AS(decreasing.resolve(), validation_error);

    GridSpec empty;
    CHECK_THROWS_AS(empty.resolve(), validation_error);
}

TEST_CASE("command line end to end") {
    CliFixture cli;
    if (cli.bin.empty()) {
        MESSAGE("NOISYCW_BIN not set, skipping the binary checks");
        return;
    }

    SUBCASE("quiet g2 run writes the series and its manifest") {
        const fs::path cfg = cli.write_config("quiet.json", R"({
          "system": {"t1_ns": 0.34, "t2_ns": 0.5},
          "field": {"rabi_mean_rad_ns": 2.0},
          "grid": {"tau_max_ns": 2.0, "step_ns": 0.5},
          "outputs": ["g2"]
        })");
        const fs::path out = cli.dir / "quiet_out";
        REQUIRE(cli.run("simulate g2 " + cfg.string() + " --out-dir " + out.string(),
                        "quiet") == 0);

        const CorrelationSeries got = read_series_csv(out / "g2.csv");
        CHECK(got.kind == SeriesKind::g2);
        REQUIRE(got.size() == 5);
        const RunConfig c = RunConfig::load(cfg);
        const CorrelationSeries want =
            g2_rotating(c.system, c.field, c.grid.resolve());
        for (size_t i = 0; i < got.size(); ++i)
            CHECK(std::abs(got.values[i] - want.values[i]) < 1e-12);

        const std::string manifest = slurp(out / "manifest.txt");
        CHECK(manifest.find("command=simulate g2") != std::string::npos);
        CHECK(manifest.find("branch=regression") != std::string::npos);
        CHECK(manifest.find("bpp_ok=true") != std::string::npos);

        char digest[32];
        std::snprintf(digest, sizeof digest, "%016llx",
                      static_cast<unsigned long long>(fnv1a64_file(out / "g2.csv")));
        CHECK(manifest.find(std::string("file=g2.csv fnv1a64=") + digest) !=
              std::string::npos);
    }

    SUBCASE("trajectory runs repeat byte for byte under a fixed seed") {
        const fs::path cfg = cli.write_config("mc.json", R"({
          "system": {"t1_ns": 0.34, "t2_ns": 0.5},
          "field": {"rabi_mean_rad_ns": 2.0},
          "noise": {"tau_c_ns": 0.5, "var_domega_rad2_ns2": 4.0},
          "ensemble": {"n_traj": 4, "n_starts": 2, "equil_ns": 1.0, "spacing_ns": 0.5},
          "grid": {"tau_max_ns": 1.0, "step_ns": 0.25},
          "outputs": ["g2"]
        })");
        const fs::path out1 = cli.dir / "mc1";
        const fs::path out2 = cli.dir / "mc2";
        REQUIRE(cli.run("simulate g2 " + cfg.string() + " --seed 9 --out-dir " +
                            out1.string(),
                        "mc1") == 0);
        REQUIRE(cli.run("simulate g2 " + cfg.string() + " --seed 9 --out-dir " +
                            out2.string(),
                        "mc2") == 0);
        CHECK(fnv1a64_file(out1 / "g2.csv") == fnv1a64_file(out2 / "g2.csv"));
        CHECK(slurp(cli.dir / "mc1.out").find("wrote") != std::string::npos);
        const std::string manifest = slurp(out1 / "manifest.txt");
        CHECK(manifest.find("branch=monte_carlo") != std::string::npos);
        CHECK(manifest.find("seed=9") != std::string::npos);
    }

    SUBCASE("broken configurations and targets exit with a usage error") {
        const fs::path bad = cli.write_config("bad.json", R"({
          "system": {"t1_ns": 0.34, "t2_ns": 0.5, "oops": 1},
          "field": {"rabi_mean_rad_ns": 2.0},
          "grid": {"tau_max_ns": 1.0, "step_ns": 0.5}
        })");
        CHECK(cli.run("simulate g2 " + bad.string(), "bad") == 1);
        CHECK(slurp(cli.dir / "bad.err").find("config field") != std::string::npos);

        const fs::path ok = cli.write_config("ok.json", R"({
          "system": {"t1_ns": 0.34, "t2_ns": 0.5},
          "field": {"rabi_mean_rad_ns": 2.0},
          "grid": {"tau_max_ns": 1.0, "step_ns": 0.5}
        })");
        CHECK(cli.run("simulate g3 " + ok.string(), "target") == 1);
        CHECK(cli.run("", "nosub") == 1);
        CHECK(cli.run("--help", "help") == 0);
    }

    SUBCASE("regime report prints the classifier flags") {
        const fs::path cfg = cli.write_config("regime.json", R"({
          "system": {"t1_ns": 0.34, "t2_ns": 0.5},
          "field": {"rabi_mean_rad_ns": 0.1},
          "noise": {"tau_c_ns": 4.0, "var_domega_rad2_ns2": 0.01, "var_de_rel": 1.0},
          "grid": {"tau_max_ns": 1.0, "step_ns": 0.5}
        })");
        REQUIRE(cli.run("regimes " + cfg.string(), "regimes") == 0);
        const std::string report = slurp(cli.dir / "regimes.out");
        CHECK(report.find("bpp_ok") != std::string::npos);
        CHECK(report.find("suggested branch: quadrature") != std::string::npos);
    }

    SUBCASE("interferometer refusal and its override") {
        const fs::path cfg = cli.write_config("hom.json", R"({
          "system": {"t1_ns": 0.34, "t2_ns": 0.5},
          "field": {"rabi_mean_rad_ns": 2.0},
          "hom": {"delay_ns": 5.0, "gamma_l_inv_ns": 0.1},
          "grid": {"tau_max_ns": 2.0, "step_ns": 0.25}
        })");
        const fs::path out = cli.dir / "hom_out";
        CHECK(cli.run("simulate hom " + cfg.string() + " --out-dir " + out.string(),
                      "hom_refused") == 3);
        CHECK(slurp(cli.dir / "hom_refused.err").find("--override-regime") !=
              std::string::npos);

        REQUIRE(cli.run("simulate hom " + cfg.string() + " --override-regime --out-dir " +
                            out.string(),
                        "hom_forced") == 0);
        CHECK(fs::exists(out / "g2x_par.csv"));
        CHECK(fs::exists(out / "g2x_perp.csv"));
        CHECK(fs::exists(out / "visibility.csv"));
        const CorrelationSeries par = read_series_csv(out / "g2x_par.csv");
        CHECK(par.kind == SeriesKind::g2x_par);
        CHECK(par.min_delay() == doctest::Approx(-2.0));
        CHECK(par.max_delay() == doctest::Approx(2.0));
        const std::string manifest = slurp(out / "manifest.txt");
        CHECK(manifest.find("regime_overridden=1") != std::string::npos);
    }

    SUBCASE("pinned data sets come with a manifest") {
        const fs::path out = cli.dir / "fig7_out";
        REQUIRE(cli.run("reproduce fig7 --out-dir " + out.string(), "fig7") == 0);
        CHECK(fs::exists(out / "fig7_ctw.csv"));
        const std::string manifest = slurp(out / "manifest.txt");
        CHECK(manifest.find("command=reproduce fig7") != std::string::npos);
        CHECK(manifest.find("file=fig7_ctw.csv") != std::string::npos);

        CHECK(cli.run("reproduce fig99", "fig99") != 0);
    }
}
