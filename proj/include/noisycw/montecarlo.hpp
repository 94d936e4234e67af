#pragma once

#include <cstdint>
#include <vector>

#include "noisycw/averaging.hpp"
#include "noisycw/dynamics.hpp"
#include "noisycw/noise.hpp"
#include "noisycw/series.hpp"

namespace noisycw {

// Trajectory ensemble controls.  Negative durations mean "pick from the
// system and noise time scales".  The integration step is snapped so the
// delay grid, the start spacing and any interferometer delay land exactly
// on step boundaries.
struct EnsembleConfig {
    int n_traj = 400;
    std::uint64_t seed = 1u;
    int n_starts = 8;
    double equil = -1.0;    // settle time before the first start
    double spacing = -1.0;  // gap between successive start times
    double dt = -1.0;       // upper bound on the integration step
    ExecPolicy policy = ExecPolicy::parallel;
    bool keep_trajectories = false;
};

struct McSeries {
    CorrelationSeries series;  // ensemble mean, normalized, stderr filled
    double mean_intensity = 0.0;
    double dt = 0.0;     // step actually used
    int n_traj = 0;
    // per-trajectory normalized values, n_traj rows, only when requested
    std::vector<std::vector<cplx>> trajectories;
};

// Ensemble-averaged emitter correlators under one noise realization per
// trajectory.  Noise streams depend on the trajectory index only, so runs
// that differ in the cross-correlation share their draws.
McSeries mc_g1(const TwoLevelSystem& sys, const DrivingField& field,
               const NoiseSpec& noise, const std::vector<double>& tau_grid,
               const EnsembleConfig& cfg, bool lab_frame = false);

McSeries mc_g2(const TwoLevelSystem& sys, const DrivingField& field,
               const NoiseSpec& noise, const std::vector<double>& tau_grid,
               const EnsembleConfig& cfg);

// Four-time interferometer cross term
//   C(tau) = < S+(t) S+(t+tau-dt) S-(t+tau) S-(t-dt) >
// for arm delay delta_t, averaged over noise with the slow-phase factor
// attached.  Normalized by the squared mean intensity.  At delays well
// beyond the emitter lifetimes it factorizes onto |g1(tau)|^2.
McSeries mc_hom_cross(const TwoLevelSystem& sys, const DrivingField& field,
                      const NoiseSpec& noise, const std::vector<double>& tau_grid,
                      double delta_t, const EnsembleConfig& cfg);

}  // namespace noisycw
