#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "noisycw/common.hpp"

namespace noisycw {

// Stationary Ornstein-Uhlenbeck pair (frequency shift, relative field
// amplitude) with one shared correlation time and cross-correlation epsilon.
struct NoiseSpec {
    double tau_c = 1.0;        // ns
    double var_domega = 0.0;   // rad^2/ns^2, variance of the frequency shift
    double var_de_rel = 0.0;   // variance of dE/E_mean (dimensionless)
    double epsilon = 0.0;      // cross-correlation in [-1, 1]

    void validate() const;
    double gamma_l() const { return var_domega * tau_c; }  // rad/ns
    double q_inv2() const { return var_de_rel; }           // Q^-2
};

struct NoisePath {
    std::vector<double> grid;     // ns, strictly increasing
    std::vector<double> domega;   // rad/ns
    std::vector<double> de_rel;   // dimensionless
    std::vector<double> phase;    // rad, phase[0] = 0, running integral of domega
};

struct JointGaussian {
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
};

// Conditional law of (domega, de_rel) after a lag: mean shrinks by
// exp(-dt/tau_c), fluctuations regrow with the complementary covariance.
struct ConditionalPropagator {
    double mean_decay = 1.0;
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
};

enum class PhaseMode { exact, trapezoid };
enum class BlurModel { exact, brownian };

// Exact discrete OU update per step; the phase channel uses the joint law of
// the endpoint value and the within-step integral (PhaseMode::exact) or a
// trapezoid rule on the sampled values.
NoisePath sample_path(const NoiseSpec& spec, const std::vector<double>& grid,
                      std::uint64_t seed, std::uint64_t stream = 0,
                      PhaseMode mode = PhaseMode::exact);

// Variance of the accumulated phase after time t, stationary start.
double phase_variance(const NoiseSpec& spec, double t);

// E[exp(i phase(t))]: exact Gaussian result, or the Brownian-limit
// exp(-gamma_l t) that holds for t >> tau_c.
double blurring_factor(const NoiseSpec& spec, double t, BlurModel model);

JointGaussian stationary_law(const NoiseSpec& spec);

ConditionalPropagator joint_propagator(const NoiseSpec& spec, double dt);

// Reduced-unit moments (mean_w, mean_e, var_w, var_e, cov) relaxing toward
// the stationary point (0, 0, 1, 1, epsilon); integrated numerically.
using MomentVec = Eigen::Matrix<double, 5, 1>;
std::vector<MomentVec> moment_flow(const NoiseSpec& spec, const MomentVec& init,
                                   const std::vector<double>& t_grid);

}  // namespace noisycw
