#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "noisycw/dynamics.hpp"
#include "noisycw/qcore.hpp"

using namespace noisycw;

namespace {

TwoLevelSystem reference_system() { return {0.34, 0.5}; }

DrivingField drive(double rabi, double detuning = 0.0) {
    DrivingField f;
    f.rabi_mean = rabi;
    f.detuning = detuning;
    return f;
}

}  // namespace

TEST_CASE("system validation enforces t2 <= 2 t1") {
    TwoLevelSystem bad{1.0, 2.5};
    CHECK_THROWS_AS(bad.validate(), validation_error);
    TwoLevelSystem edge{1.0, 2.0};
    CHECK_NOTHROW(edge.validate());
}

TEST_CASE("saturation parameter reproduces hand-computed values") {
    CHECK(saturation(reference_system(), drive(0.1)) ==
          doctest::Approx(1.7e-3).epsilon(1e-3));
    CHECK(saturation(reference_system(), drive(2.0)) ==
          doctest::Approx(0.68).epsilon(1e-3));
    // detuning suppresses it by 1 + (detuning t2)^2
    CHECK(saturation(reference_system(), drive(2.0, 2.0)) ==
          doctest::Approx(0.68 / 2.0).epsilon(1e-9));
}

TEST_CASE("collapse operators split 1/t2 into radiative and pure dephasing parts") {
    const auto ops_lifetime_limited = tls_collapse_ops({1.0, 2.0});
    CHECK(ops_lifetime_limited.size() == 1);
    const auto ops = tls_collapse_ops(reference_system());
    REQUIRE(ops.size() == 2);
    // net effect: free coherence decays at exactly 1/t2
    const LiouvMatrix liouv = build_liouvillian(OperatorMatrix::Zero(), ops);
    OperatorMatrix rho;
    rho << 0.5, 0.5, 0.5, 0.5;
    const OperatorMatrix evolved = apply_propagator(propagate(liouv, 1.0), rho);
    CHECK(std::abs(evolved(0, 1)) ==
          doctest::Approx(0.5 * std::exp(-1.0 / 0.5)).epsilon(1e-10));
}

TEST_CASE("generator family is linear in the two noise directions") {
    const TwoLevelSystem sys = reference_system();
    const DrivingField field = drive(0.7, 0.2);
    const LiouvillianFamily fam = liouvillian_family(sys, field);
    for (auto [dw, de] : {std::pair{0.0, 0.0}, {0.3, -0.1}, {-0.8, 0.5}}) {
        DrivingField shifted = field;
        shifted.detuning += dw;
        shifted.rabi_mean *= 1.0 + de;
        const LiouvMatrix direct =
            build_liouvillian(tls_hamiltonian(shifted), tls_collapse_ops(sys));
        CHECK((fam.at(dw, de) - direct).norm() < 1e-12);
    }
}

TEST_CASE("intensity correlation matches the closed-form oscillation") {
    // lifetime-limited resonant case: g2(tau) = 1 - exp(-3 tau / (4 t1))
    // (cos(mu tau) + 3/(4 t1 mu) sin(mu tau)), mu = sqrt(omega^2 - (1/(4 t1))^2)
    const TwoLevelSystem sys{1.0, 2.0};
    const DrivingField field = drive(3.0);
    const std::vector<double> grid = uniform_grid(0.0, 6.0, 0.05);
    const CorrelationSeries g2 = g2_rotating(sys, field, grid);

    const double mu = std::sqrt(9.0 - 1.0 / 16.0);
    for (size_t i = 0; i < grid.size(); ++i) {
        const double tau = grid[i];
        const double expected =
            1.0 - std::exp(-0.75 * tau) *
                      (std::cos(mu * tau) + 0.75 / mu * std::sin(mu * tau));
        CHECK(g2.values[i].real() == doctest::Approx(expected).epsilon(5e-8));
        CHECK(std::abs(g2.values[i].imag()) < 1e-10);
    }
    CHECK(g2.kind == SeriesKind::g2);
    CHECK(g2.normalized);
}

TEST_CASE("first-order coherence starts at one and settles on the elastic fraction") {
    const TwoLevelSystem sys = reference_system();
    const DrivingField field = drive(0.5);
    const std::vector<double> grid = uniform_grid(0.0, 30.0, 0.25);
    const CorrelationSeries g1 = g1_rotating(sys, field, grid);
    CHECK(std::abs(g1.values.front() - 1.0) < 1e-10);

    const double s = saturation(sys, field);
    const double elastic = sys.t2 / (2.0 * sys.t1 * (1.0 + s));
    CHECK(std::abs(g1.values.back()) == doctest::Approx(elastic).epsilon(1e-6));
}

TEST_CASE("intensity correlation is antibunched and normalized") {
    const TwoLevelSystem sys = reference_system();
    for (double rabi : {0.1, 2.0}) {
        const CorrelationSeries g2 =
            g2_rotating(sys, drive(rabi), uniform_grid(0.0, 40.0, 0.5));
        CHECK(std::abs(g2.values.front()) < 1e-10);
        for (const cplx& v : g2.values) CHECK(v.real() > -1e-10);
        CHECK(g2.values.back().real() == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("undriven emitter has no normalizable correlations") {
    CHECK_THROWS_AS(
        g1_rotating(reference_system(), drive(0.0), uniform_grid(0.0, 1.0, 0.1)),
        undefined_normalization_error);
}

TEST_CASE("lab-frame coherence carries the phase envelope and the carrier") {
    const TwoLevelSystem sys = reference_system();
    const CorrelationSeries rot =
        g1_rotating(sys, drive(0.5), uniform_grid(0.0, 5.0, 0.5));
    NoiseSpec noise;
    noise.tau_c = 4.0;
    noise.var_domega = 0.05;
    const double lab_freq = 2.1;
    const CorrelationSeries lab = g1_lab(rot, noise, lab_freq);
    CHECK(lab.kind == SeriesKind::g1_lab);
    for (size_t i = 0; i < rot.size(); ++i) {
        const double tau = rot.delays[i];
        const cplx expected = rot.values[i] * std::exp(-noise.gamma_l() * tau) *
                              std::exp(cplx(0.0, lab_freq * tau));
        CHECK(std::abs(lab.values[i] - expected) < 1e-12);
    }
}

TEST_CASE("fast-noise collapse rates keep the quadratic weights") {
    DrivingField field = drive(0.7);
    NoiseSpec noise;
    noise.tau_c = 0.1;
    noise.var_domega = 0.4;
    noise.var_de_rel = 0.2;
    noise.epsilon = 0.5;
    const BppRates r = bpp_rates(field, noise);
    const double omega = field.rabi_mean;
    const double cov = noise.epsilon * std::sqrt(noise.var_domega * noise.var_de_rel);
    CHECK(r.c_sx + r.c_mix ==
          doctest::Approx(2.0 * noise.tau_c * omega * omega * noise.var_de_rel));
    CHECK(r.c_sz + r.c_mix == doctest::Approx(2.0 * noise.tau_c * noise.var_domega));
    CHECK(r.c_mix == doctest::Approx(2.0 * noise.tau_c * omega * cov));
}

TEST_CASE("pure frequency noise dephases the coherence at gamma_l") {
    DrivingField field = drive(0.7);
    NoiseSpec noise;
    noise.tau_c = 0.05;
    noise.var_domega = 0.8;
    const auto ops = bpp_collapse_ops(field, noise);
    REQUIRE(ops.size() == 1);

    const double t1 = 2.0;
    std::vector<OperatorMatrix> all = {std::sqrt(1.0 / t1) * s_minus()};
    all.insert(all.end(), ops.begin(), ops.end());
    const LiouvMatrix liouv = build_liouvillian(OperatorMatrix::Zero(), all);
    OperatorMatrix rho;
    rho << 0.5, 0.5, 0.5, 0.5;
    const double t = 3.0;
    const OperatorMatrix evolved = apply_propagator(propagate(liouv, t), rho);
    const double rate = 0.5 / t1 + noise.gamma_l();
    CHECK(std::abs(evolved(0, 1)) ==
          doctest::Approx(0.5 * std::exp(-rate * t)).epsilon(1e-9));
}

TEST_CASE("anti-correlated noise can leave the collapse domain") {
    DrivingField field = drive(1.0);
    NoiseSpec noise;
    noise.tau_c = 0.1;
    noise.var_domega = 1.0;
    noise.var_de_rel = 0.01;
    noise.epsilon = 0.5;
    CHECK_THROWS_AS(bpp_collapse_ops(field, noise), parameter_domain_error);
}

TEST_CASE("regime classifier separates the modeling routes") {
    const TwoLevelSystem sys = reference_system();

    NoiseSpec quiet;
    const RegimeReport r0 = regime_classify(sys, drive(0.1), quiet);
    CHECK(r0.bpp_ok);
    CHECK_FALSE(r0.monte_carlo_required);

    NoiseSpec slow;  // tau_c far above the emitter time scales
    slow.tau_c = 4.0;
    slow.var_domega = 0.01;
    slow.var_de_rel = 1.0;
    const RegimeReport r1 = regime_classify(sys, drive(0.1), slow);
    CHECK(r1.pseudo_adiabatic_ok);
    CHECK_FALSE(r1.bpp_ok);
    CHECK_FALSE(r1.monte_carlo_required);

    NoiseSpec hard;  // strong, with tau_c between the regimes
    hard.tau_c = 1.0;
    hard.var_domega = 4.0;
    hard.var_de_rel = 1.0;
    const RegimeReport r2 = regime_classify(sys, drive(2.0), hard);
    CHECK_FALSE(r2.bpp_ok);
    CHECK_FALSE(r2.pseudo_adiabatic_ok);
    CHECK(r2.monte_carlo_required);

    const RegimeReport with_delay =
        regime_classify(sys, drive(0.1), slow, kDefaultRegimeTheta, 43.0);
    CHECK(with_delay.ratios.count("hom_decouple") == 1);
    CHECK(with_delay.summary().find("pseudo_adiabatic_ok") != std::string::npos);
}

TEST_CASE("extra collapse channels accelerate the coherence decay") {
    const TwoLevelSystem sys = reference_system();
    const DrivingField field = drive(0.3);
    NoiseSpec noise;
    noise.tau_c = 0.05;
    noise.var_domega = 0.5;
    const std::vector<double> grid = uniform_grid(0.0, 6.0, 0.5);
    const CorrelationSeries bare = g1_rotating(sys, field, grid);
    const CorrelationSeries dressed =
        g1_rotating(sys, field, grid, bpp_collapse_ops(field, noise));
    for (size_t i = 1; i < grid.size(); ++i)
        CHECK(std::abs(dressed.values[i]) < std::abs(bare.values[i]) + 1e-12);
}
