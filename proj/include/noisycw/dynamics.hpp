#pragma once

#include <map>
#include <string>
#include <vector>

#include "noisycw/noise.hpp"
#include "noisycw/qcore.hpp"
#include "noisycw/series.hpp"

namespace noisycw {

struct TwoLevelSystem {
    double t1 = 1.0;  // ns, population lifetime
    double t2 = 2.0;  // ns, total coherence time, t2 <= 2 t1

    void validate() const;
};

struct DrivingField {
    double rabi_mean = 0.0;   // rad/ns
    double detuning = 0.0;    // rad/ns, mean detuning from the transition
    double lab_freq = 0.0;    // rad/ns, mean carrier used when dressing g1 back
                              // to the lab frame (offset convention, default 0)

    void validate() const;
};

// s = Omega^2 T1 T2 / (1 + (detuning T2)^2)
double saturation(const TwoLevelSystem& sys, const DrivingField& field);

OperatorMatrix tls_hamiltonian(const DrivingField& field);

// Generator split along the two noise directions, so evaluating it at a
// noise draw is a cheap linear combination.
struct LiouvillianFamily {
    LiouvMatrix base;      // mean Hamiltonian plus dissipators
    LiouvMatrix d_detune;  // coefficient of the frequency shift
    LiouvMatrix d_rabi;    // coefficient of the relative amplitude shift

    LiouvMatrix at(double dw, double de) const {
        return base + dw * d_detune + de * d_rabi;
    }
};
LiouvillianFamily liouvillian_family(const TwoLevelSystem& sys, const DrivingField& field);

// Radiative decay at 1/T1 plus pure dephasing filling up 1/T2.
std::vector<OperatorMatrix> tls_collapse_ops(const TwoLevelSystem& sys);

// Motional-narrowing collapse rates for fast noise: coefficients c_i with
// L1 = sqrt(c1) Sx, L2 = sqrt(c2) Sz, L3 = sqrt(c3) (Sx + Sz).
struct BppRates {
    double c_sx = 0.0;
    double c_sz = 0.0;
    double c_mix = 0.0;
};
BppRates bpp_rates(const DrivingField& field, const NoiseSpec& noise);
std::vector<OperatorMatrix> bpp_collapse_ops(const DrivingField& field,
                                             const NoiseSpec& noise);

// First- and second-order correlation functions of the emitted field in the
// rotating frame, from the steady state via the regression theorem.
// tau_grid must be nonnegative and strictly increasing; results are
// normalized (g1 by the steady intensity, g2 by its square).
CorrelationSeries g1_rotating(const TwoLevelSystem& sys, const DrivingField& field,
                              const std::vector<double>& tau_grid,
                              const std::vector<OperatorMatrix>& extra_collapse = {});
CorrelationSeries g2_rotating(const TwoLevelSystem& sys, const DrivingField& field,
                              const std::vector<double>& tau_grid,
                              const std::vector<OperatorMatrix>& extra_collapse = {});

// Lab-frame first-order coherence: rotating-frame g1 times the carrier
// phase and the frequency-noise blurring envelope exp(-gamma_l |tau|).
CorrelationSeries g1_lab(const CorrelationSeries& g1_rot, const NoiseSpec& noise,
                         double lab_freq);

inline constexpr double kDefaultRegimeTheta = 0.2;

struct RegimeReport {
    bool bpp_ok = false;
    bool pseudo_adiabatic_ok = false;
    bool frame_decoupled = false;
    bool monte_carlo_required = false;
    double theta = kDefaultRegimeTheta;
    std::map<std::string, double> ratios;

    std::string summary() const;
};

// Dimensionless ratios deciding which modeling route is trustworthy.
// hom_delay > 0 adds the interferometer decoupling diagnostic.
RegimeReport regime_classify(const TwoLevelSystem& sys, const DrivingField& field,
                             const NoiseSpec& noise,
                             double theta = kDefaultRegimeTheta,
                             double hom_delay = 0.0);

}  // namespace noisycw
