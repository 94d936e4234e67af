#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "noisycw/qcore.hpp"

using namespace noisycw;

namespace {

OperatorMatrix ground() {
    OperatorMatrix r = OperatorMatrix::Zero();
    r(0, 0) = 1.0;
    return r;
}

}  // namespace

TEST_CASE("ladder operator algebra") {
    const OperatorMatrix sp = s_plus(), sm = s_minus();
    CHECK((sp * sp).norm() == 0.0);
    CHECK((sm * sm).norm() == 0.0);
    CHECK((sp - sm.adjoint()).norm() == 0.0);
    CHECK((s_x() - 0.5 * (sp + sm)).norm() == 0.0);
    CHECK((s_number() - sp * sm).norm() == 0.0);
    const OperatorMatrix comm = s_z() * s_x() - s_x() * s_z();
    // [Sz, Sx] = i Sy = (S+ - S-) / 2
    CHECK((2.0 * comm - (sp - sm)).norm() < 1e-15);
}

TEST_CASE("vectorization is column-major with rho_eg at index 1") {
    OperatorMatrix rho;
    rho << cplx(0.7), cplx(0.1, -0.2), cplx(0.1, 0.2), cplx(0.3);
    const StateVec v = vectorize(rho);
    CHECK(v(0) == rho(0, 0));
    CHECK(v(1) == rho(1, 0));
    CHECK(v(2) == rho(0, 1));
    CHECK(v(3) == rho(1, 1));
    CHECK((unvectorize(v) - rho).norm() == 0.0);
}

TEST_CASE("kron against hand-expanded entries") {
    OperatorMatrix a, b;
    a << 1.0, 2.0, 3.0, 4.0;
    b << 0.0, cplx(0.0, 1.0), 5.0, 6.0;
    const Eigen::Matrix4cd k = kron22(a, b);
    CHECK(k(0, 0) == a(0, 0) * b(0, 0));
    CHECK(k(0, 1) == a(0, 0) * b(0, 1));
    CHECK(k(2, 1) == a(1, 0) * b(0, 1));
    CHECK(k(3, 3) == a(1, 1) * b(1, 1));
}

TEST_CASE("pure decay relaxes population and coherence at the closed-form rates") {
    const double t1 = 0.34;
    const std::vector<OperatorMatrix> collapse = {std::sqrt(1.0 / t1) * s_minus()};
    const LiouvMatrix liouv = build_liouvillian(OperatorMatrix::Zero(), collapse);

    OperatorMatrix rho;
    rho << 0.4, cplx(0.2, 0.1), cplx(0.2, -0.1), 0.6;
    const double t = 0.8;
    const OperatorMatrix evolved = apply_propagator(propagate(liouv, t), rho);
    CHECK(evolved(1, 1).real() == doctest::Approx(0.6 * std::exp(-t / t1)).epsilon(1e-10));
    CHECK(std::abs(evolved(0, 1)) ==
          doctest::Approx(std::abs(rho(0, 1)) * std::exp(-t / (2.0 * t1))).epsilon(1e-10));
    CHECK(std::abs(evolved.trace() - 1.0) < 1e-12);
}

TEST_CASE("undamped resonant drive produces Rabi oscillation sin^2(Omega t / 2)") {
    const double omega = 1.7;
    const LiouvMatrix liouv = build_liouvillian(omega * s_x(), {});
    for (double t : {0.3, 1.1, 2.9}) {
        const OperatorMatrix rho = apply_propagator(propagate(liouv, t), ground());
        const double expected = std::pow(std::sin(0.5 * omega * t), 2);
        CHECK(rho(1, 1).real() == doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("build_liouvillian rejects non-Hermitian Hamiltonians") {
    OperatorMatrix h;
    h << 0.0, 1.0, 2.0, 0.0;
    CHECK_THROWS_AS(build_liouvillian(h, {}), validation_error);
}

TEST_CASE("driven steady state matches the saturation formula") {
    const double t1 = 0.34, t2 = 0.5, omega = 2.0;
    std::vector<OperatorMatrix> collapse = {std::sqrt(1.0 / t1) * s_minus()};
    const double dephase = 2.0 * (1.0 / t2 - 0.5 / t1);
    collapse.push_back(std::sqrt(dephase) * s_z());
    const LiouvMatrix liouv = build_liouvillian(omega * s_x(), collapse);
    const OperatorMatrix ss = steady_state(liouv);

    const double s = omega * omega * t1 * t2;
    CHECK(ss(1, 1).real() == doctest::Approx(0.5 * s / (1.0 + s)).epsilon(1e-9));
    CHECK(hermiticity_defect(ss) < 1e-12);
    CHECK(std::abs(ss.trace() - 1.0) < 1e-12);
    CHECK(min_eigenvalue(ss) > -1e-12);
    // steady under propagation
    const OperatorMatrix later = apply_propagator(propagate(liouv, 3.0), ss);
    CHECK((later - ss).norm() < 1e-9);
}

TEST_CASE("degenerate kernel still yields a trace-one Hermitian state") {
    const LiouvMatrix liouv = build_liouvillian(OperatorMatrix::Zero(), {});
    const OperatorMatrix ss = steady_state(liouv);
    CHECK(std::abs(ss.trace() - 1.0) < 1e-9);
    CHECK(hermiticity_defect(ss) < 1e-9);
}

TEST_CASE("propagation is a semigroup") {
    const double t1 = 0.34, t2 = 0.5;
    std::vector<OperatorMatrix> collapse = {std::sqrt(1.0 / t1) * s_minus(),
                                            std::sqrt(2.0 * (1.0 / t2 - 0.5 / t1)) *
                                                s_z()};
    const LiouvMatrix liouv = build_liouvillian(0.7 * s_x() + 0.4 * s_z(), collapse);
    const LiouvMatrix split = propagate(liouv, 0.9) * propagate(liouv, 1.4);
    const LiouvMatrix direct = propagate(liouv, 2.3);
    CHECK((split - direct).norm() < 1e-10);
}

TEST_CASE("propagated states stay physical") {
    const LiouvMatrix liouv = build_liouvillian(
        1.3 * s_x() - 0.2 * s_z(), {std::sqrt(2.0) * s_minus(), 0.5 * s_z()});
    OperatorMatrix rho = ground();
    for (double t : {0.01, 0.1, 0.5, 2.0, 10.0}) {
        const OperatorMatrix evolved = apply_propagator(propagate(liouv, t), rho);
        CHECK(std::abs(evolved.trace() - 1.0) < 1e-10);
        CHECK(hermiticity_defect(evolved) < 1e-10);
        CHECK(min_eigenvalue(evolved) > -1e-10);
    }
}

TEST_CASE("time-dependent integrator agrees with the constant-generator propagator") {
    const double omega = 0.9;
    const std::vector<OperatorMatrix> collapse = {1.2 * s_minus()};
    auto h = [omega](double) { return omega * s_x(); };
    const std::vector<double> grid = {0.0, 0.5, 1.0, 2.0};
    const auto states = evolve_timedep(h, collapse, ground(), grid);
    REQUIRE(states.size() == grid.size());

    const LiouvMatrix liouv = build_liouvillian(omega * s_x(), collapse);
    for (size_t i = 0; i < grid.size(); ++i) {
        const OperatorMatrix expected =
            apply_propagator(propagate(liouv, grid[i]), ground());
        CHECK((states[i] - expected).norm() < 1e-7);
    }
}

TEST_CASE("time-dependent integrator tracks a ramped drive") {
    // H(t) = a t Sx commutes with itself, so the exact excited population is
    // sin^2(a t^2 / 4)
    const double a = 2.0;
    auto h = [a](double t) { return a * t * s_x(); };
    const std::vector<double> grid = {0.0, 0.7, 1.3};
    const auto states = evolve_timedep(h, {}, ground(), grid);
    for (size_t i = 1; i < grid.size(); ++i) {
        const double area = 0.5 * a * grid[i] * grid[i];
        CHECK(states[i](1, 1).real() ==
              doctest::Approx(std::pow(std::sin(0.5 * area), 2)).epsilon(1e-6));
    }
}
