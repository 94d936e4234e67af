#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "noisycw/averaging.hpp"
#include "noisycw/noise.hpp"
#include "noisycw/series.hpp"

namespace noisycw {

// Two-splitter interferometer with one delayed arm.  Both splitters share
// the same intensity coefficients; gamma_l is the laser coherence rate
// governing the interference envelopes (infinity = fully blurred).
struct HOMSetup {
    double r_int = 0.5;    // intensity reflection R
    double t_int = 0.5;    // intensity transmission T
    double delay = 1.0;    // ns, > 0
    double pol_angle = 0.0;  // rad, 0 = parallel arms, pi/2 = crossed
    double gamma_l = 0.0;    // 1/ns
    double irf_fwhm = 0.0;   // ns, 0 = ideal detectors

    void validate() const;
    double alpha() const { return r_int / t_int; }  // R/T
};

// Coincidence weights for every placement of the four detection operators
// across the two arms, keyed by the 4-bit arm choice (e1 e2 e3 e4).
struct WeightTable {
    std::map<int, cplx> weights;

    cplx at(int e1, int e2, int e3, int e4) const {
        return weights.at(e1 << 3 | e2 << 2 | e3 << 1 | e4);
    }
};

WeightTable hom_weights(cplx ta, cplx tb, cplx ra, cplx rb, double phi);

// The nine distinct correlator groups the sixteen weights collapse onto for
// identical splitters.  table2_factor gives the group prefactor,
// table2_envelope the phase-noise attenuation of each group.
cplx table2_factor(int term, cplx ta, cplx tb, cplx ra, cplx rb, double phi);
double table2_envelope(int term, double tau, double delta_t, double gamma_l);

// Coincidence response from intensity correlations plus the two-photon
// interference term, valid once phase noise has scrambled the one-photon
// interferences (gamma_l * delay large).  Inputs are normalized series; g2
// must cover tau and tau -/+ delay for every requested output delay.
// emitter_scale (max of T1, T2) enables the delay sanity warning.
CorrelationSeries g2x_bpp(const CorrelationSeries& g2, const CorrelationSeries& g1_rot,
                          const HOMSetup& setup,
                          const std::vector<double>& out_delays = {},
                          double emitter_scale = 0.0,
                          std::vector<std::string>* warnings = nullptr);

// Same assembly in the weak-driving noisy-source limit: the inputs are the
// noise-free correlators of the mean field, all noise effects enter through
// the closed-form weights W1, W2 (bunching model a, b and the noise spec).
CorrelationSeries g2x_weak_noisy(const CorrelationSeries& g2_ref,
                                 const CorrelationSeries& g1_ref, const HOMSetup& setup,
                                 const NoiseSpec& noise, const BunchingModel& model,
                                 const std::vector<double>& out_delays = {},
                                 double emitter_scale = 0.0,
                                 std::vector<std::string>* warnings = nullptr);

// Pointwise V = |par - perp| / perp; points with perp below 1e-9 are set to
// zero and counted in the warnings.
CorrelationSeries visibility(const CorrelationSeries& g2x_par,
                             const CorrelationSeries& g2x_perp,
                             std::vector<std::string>* warnings = nullptr);

// Signed dip depth (perp - par) normalized by the zero-delay crossed
// response, the integrand behind the coalescence time window.
CorrelationSeries coalescence_profile(const CorrelationSeries& g2x_par,
                                      const CorrelationSeries& g2x_perp);

struct CTWResult {
    double ctw = 0.0;       // ns
    double window_lo = 0.0;
    double window_hi = 0.0;
    double truncation_residual = 0.0;  // ns, estimated mass beyond the window
};

// Trapezoidal integral of a visibility series over the window; the residual
// outside the window is estimated from the trailing decade of the envelope
// and reported, not added.
CTWResult ctw(const CorrelationSeries& v, double window_lo, double window_hi);
// Window defaulted to [-delay/2, +delay/2], clear of the echo features.
CTWResult ctw(const CorrelationSeries& v, const HOMSetup& setup);

// Gaussian detector-response smoothing, kernel normalized to unit sum.
// Nonuniform grids are resampled internally with monotone cubics.
CorrelationSeries convolve_irf(const CorrelationSeries& series, double fwhm);

}  // namespace noisycw
