#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "noisycw/montecarlo.hpp"

using namespace noisycw;

namespace {

TwoLevelSystem emitter() { return {0.34, 0.5}; }

DrivingField drive(double rabi) {
    DrivingField f;
    f.rabi_mean = rabi;
    return f;
}

NoiseSpec quiet_noise() { return NoiseSpec{}; }

NoiseSpec slow_noise(double eps = 0.0) {
    NoiseSpec n;
    n.tau_c = 4.0;
    n.var_domega = 0.01;
    n.var_de_rel = 1.0;
    n.epsilon = eps;
    return n;
}

double rms_diff(const CorrelationSeries& a, const CorrelationSeries& b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) acc += std::norm(a.values[i] - b.values[i]);
    return std::sqrt(acc / a.size());
}

EnsembleConfig small_cfg() {
    EnsembleConfig cfg;
    cfg.n_traj = 4;
    cfg.n_starts = 4;
    cfg.seed = 11;
    return cfg;
}

}  // namespace

TEST_CASE("quiet ensemble reproduces the regression correlators") {
    const TwoLevelSystem sys = emitter();
    const DrivingField field = drive(2.0);
    const std::vector<double> grid = uniform_grid(0.0, 3.0, 0.25);

    const McSeries m1 = mc_g1(sys, field, quiet_noise(), grid, small_cfg());
    const CorrelationSeries r1 = g1_rotating(sys, field, grid);
    CHECK(rms_diff(m1.series, r1) < 1e-9);
    CHECK(m1.series.kind == SeriesKind::g1_rotating);
    CHECK(m1.n_traj == 4);
    CHECK(m1.dt > 0.0);
    // identical trajectories, no spread
    for (double se : m1.series.stderrs) CHECK(se < 1e-12);

    const McSeries m2 = mc_g2(sys, field, quiet_noise(), grid, small_cfg());
    const CorrelationSeries r2 = g2_rotating(sys, field, grid);
    CHECK(rms_diff(m2.series, r2) < 1e-9);
    CHECK(m2.series.values.front().real() < 1e-9);
}

TEST_CASE("quiet interferometer cross term factorizes onto the coherence") {
    const TwoLevelSystem sys = emitter();
    const DrivingField field = drive(2.0);
    const std::vector<double> grid = uniform_grid(0.0, 1.25, 0.05);

    const McSeries hom = mc_hom_cross(sys, field, quiet_noise(), grid, 5.0, small_cfg());
    const CorrelationSeries g1 = g1_rotating(sys, field, grid);
    CHECK(hom.series.kind == SeriesKind::hom_cross);
    double acc = 0.0;
    for (size_t i = 0; i < grid.size(); ++i)
        acc += std::norm(hom.series.values[i] - cplx(std::norm(g1.values[i])));
    CHECK(std::sqrt(acc / grid.size()) < 0.03);
}

TEST_CASE("noisy coherence ensemble follows the weak closed form") {
    const TwoLevelSystem sys = emitter();
    const DrivingField field = drive(0.1);
    const NoiseSpec n = slow_noise();
    const std::vector<double> grid = uniform_grid(0.0, 10.0, 0.5);

    EnsembleConfig cfg;
    cfg.n_traj = 400;
    cfg.seed = 5;
    const McSeries mc = mc_g1(sys, field, n, grid, cfg);
    const CorrelationSeries closed = weak_g1_average(g1_rotating(sys, field, grid), n);
    CHECK(rms_diff(mc.series, closed) < 0.05);

    double max_se = 0.0;
    for (size_t i = 1; i < grid.size(); ++i) max_se = std::max(max_se, mc.series.stderrs[i]);
    CHECK(max_se > 0.0);
    CHECK(max_se < 0.05);
}

TEST_CASE("slow-phase factor in the cross term keeps the brownian min rule") {
    NoiseSpec n;
    n.tau_c = 0.02;
    n.var_domega = 10.0;  // gamma_l = 0.2
    const double gl = n.gamma_l();
    const double delta_t = 2.0;
    const int n_paths = 4000;

    for (double tau : {1.0, 3.0, 5.0}) {
        std::vector<double> times = {tau, delta_t, delta_t + tau};
        std::sort(times.begin(), times.end());
        times.erase(std::unique(times.begin(), times.end()), times.end());
        std::vector<double> grid = {0.0};
        grid.insert(grid.end(), times.begin(), times.end());

        auto phase_at = [&](const NoisePath& p, double t) {
            for (size_t i = 0; i < p.grid.size(); ++i)
                if (p.grid[i] == t) return p.phase[i];
            FAIL("time not on grid");
            return 0.0;
        };

        cplx mean(0.0);
        for (int r = 0; r < n_paths; ++r) {
            const NoisePath p = sample_path(n, grid, 77, std::uint64_t(r));
            const double x =
                phase_at(p, delta_t) + phase_at(p, tau) - phase_at(p, delta_t + tau);
            mean += std::exp(cplx(0.0, x));
        }
        mean /= double(n_paths);
        const double expected = std::exp(-2.0 * gl * std::min(tau, delta_t));
        CHECK(mean.real() == doctest::Approx(expected).epsilon(0.07));
        CHECK(std::abs(mean.imag()) < 0.05);
    }
}

TEST_CASE("fixed seed gives bitwise reproducible ensembles") {
    const TwoLevelSystem sys = emitter();
    const DrivingField field = drive(0.5);
    const NoiseSpec n = slow_noise(0.3);
    const std::vector<double> grid = uniform_grid(0.0, 2.0, 0.5);

    EnsembleConfig cfg;
    cfg.n_traj = 8;
    cfg.n_starts = 2;
    cfg.equil = 2.0;
    cfg.spacing = 1.0;
    cfg.seed = 42;

    const McSeries a = mc_g2(sys, field, n, grid, cfg);
    const McSeries b = mc_g2(sys, field, n, grid, cfg);
    cfg.policy = ExecPolicy::serial;
    const McSeries c = mc_g2(sys, field, n, grid, cfg);
    for (size_t i = 0; i < grid.size(); ++i) {
        CHECK(a.series.values[i].real() == b.series.values[i].real());
        CHECK(a.series.values[i].imag() == b.series.values[i].imag());
        CHECK(a.series.values[i].real() == c.series.values[i].real());
        CHECK(a.series.values[i].imag() == c.series.values[i].imag());
    }

    cfg.policy = ExecPolicy::parallel;
    cfg.seed = 43;
    const McSeries d = mc_g2(sys, field, n, grid, cfg);
    bool any_diff = false;
    for (size_t i = 0; i < grid.size(); ++i)
        if (d.series.values[i] != a.series.values[i]) any_diff = true;
    CHECK(any_diff);
}

TEST_CASE("stored trajectories average back to the ensemble mean") {
    const TwoLevelSystem sys = emitter();
    const DrivingField field = drive(0.5);
    const std::vector<double> grid = uniform_grid(0.0, 2.0, 0.5);

    EnsembleConfig cfg;
    cfg.n_traj = 6;
    cfg.n_starts = 2;
    cfg.equil = 2.0;
    cfg.spacing = 1.0;
    cfg.keep_trajectories = true;

    const McSeries mc = mc_g1(sys, field, slow_noise(), grid, cfg);
    REQUIRE(mc.trajectories.size() == 6);
    for (const auto& row : mc.trajectories) REQUIRE(row.size() == grid.size());
    for (size_t k = 0; k < grid.size(); ++k) {
        cplx mean(0.0);
        for (const auto& row : mc.trajectories) mean += row[k];
        mean /= 6.0;
        CHECK(std::abs(mean - mc.series.values[k]) < 1e-12);
    }
}

TEST_CASE("ensemble rejects unusable grids and delays") {
    const TwoLevelSystem sys = emitter();
    const DrivingField field = drive(0.5);
    const EnsembleConfig cfg = small_cfg();

    CHECK_THROWS_AS(mc_g1(sys, field, quiet_noise(), {0.0}, cfg), validation_error);
    CHECK_THROWS_AS(mc_g1(sys, field, quiet_noise(), {0.5, 1.0}, cfg), validation_error);
    CHECK_THROWS_AS(mc_g1(sys, field, quiet_noise(), {0.0, 0.5, 1.2}, cfg),
                    validation_error);

    EnsembleConfig bad = cfg;
    bad.n_traj = 0;
    CHECK_THROWS_AS(mc_g1(sys, field, quiet_noise(), {0.0, 0.5, 1.0}, bad),
                    validation_error);

    CHECK_THROWS_AS(
        mc_hom_cross(sys, field, quiet_noise(), {0.0, 0.5, 1.0}, 0.0, cfg),
        validation_error);
    EnsembleConfig stepped = cfg;
    stepped.dt = 0.05;
    CHECK_THROWS_AS(
        mc_hom_cross(sys, field, quiet_noise(), uniform_grid(0.0, 1.0, 0.25), 0.312,
                     stepped),
        validation_error);
}
