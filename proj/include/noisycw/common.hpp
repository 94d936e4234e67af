#pragma once

#include <complex>
#include <stdexcept>
#include <string>

// Conventions used throughout:
//   * time in ns, rates and angular frequencies in rad/ns, hbar = 1
//   * two-level basis index 0 = ground, 1 = excited
//   * density matrices vectorized column-major: [rho_gg, rho_eg, rho_ge, rho_ee]
//   * under H = dw * S+S- alone, rho_ge = <g|rho|e> rotates as exp(+i dw t)

namespace noisycw {

inline constexpr const char* kVersion = "0.1.0";

using cplx = std::complex<double>;

// Bad user-supplied parameters (non-positive times, inconsistent grids, ...).
struct validation_error : std::invalid_argument {
    explicit validation_error(const std::string& msg) : std::invalid_argument(msg) {}
};

// Parameter combination leaves the supported domain (e.g. a collapse-rate
// radicand turning negative for anti-correlated noise).
struct parameter_domain_error : std::domain_error {
    explicit parameter_domain_error(const std::string& msg) : std::domain_error(msg) {}
};

// Normalizer of a correlation function is zero or numerically meaningless.
struct undefined_normalization_error : std::runtime_error {
    explicit undefined_normalization_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Adaptive integrator could not reach the requested tolerance.
struct integration_error : std::runtime_error {
    integration_error(const std::string& msg, double t_fail)
        : std::runtime_error(msg + " (t = " + std::to_string(t_fail) + " ns)"), t(t_fail) {}
    double t;
};

// Multi-time correlator requested with a time ordering the propagator-insertion
// scheme cannot represent.
struct unsupported_ordering_error : std::runtime_error {
    explicit unsupported_ordering_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Series grid does not cover the span an operation needs.
struct coverage_error : std::runtime_error {
    explicit coverage_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace noisycw
