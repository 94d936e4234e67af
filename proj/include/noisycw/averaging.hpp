#pragma once

#include <filesystem>
#include <functional>

#include "noisycw/dynamics.hpp"
#include "noisycw/noise.hpp"
#include "noisycw/series.hpp"

namespace noisycw {

enum class ExecPolicy { serial, parallel };

inline constexpr int kDefaultQuadOrder = 24;

// Correlator kernel sampled at two noise draws: the early draw (dw1, de1)
// fixes the preparation, the late draw (dw2, de2) the delay evolution.
using PairKernel =
    std::function<cplx(double dw1, double de1, double dw2, double de2, double tau)>;

// Slow-noise average of a two-time kernel: tensor Gauss-Hermite over the
// stationary law at the early time and the lag-conditional law at the late
// time.  Deterministic reduction order, independent of the thread count.
cplx pseudo_adiabatic_average(const PairKernel& kernel, const NoiseSpec& noise,
                              double tau, int order = kDefaultQuadOrder,
                              ExecPolicy policy = ExecPolicy::parallel);

// Quadrature-averaged, normalized emitter correlators on a nonnegative grid.
// Normalization follows the stationary-intensity convention: g1 by the mean
// intensity, g2 by its square.
CorrelationSeries averaged_g1_series(const TwoLevelSystem& sys, const DrivingField& field,
                                     const NoiseSpec& noise,
                                     const std::vector<double>& tau_grid,
                                     int order = kDefaultQuadOrder,
                                     ExecPolicy policy = ExecPolicy::parallel);
CorrelationSeries averaged_g2_series(const TwoLevelSystem& sys, const DrivingField& field,
                                     const NoiseSpec& noise,
                                     const std::vector<double>& tau_grid,
                                     int order = kDefaultQuadOrder,
                                     ExecPolicy policy = ExecPolicy::parallel);

// Infinitely slow noise: the average collapses to a frozen-parameter mixture.
enum class FrozenMode { full_quadrature, two_point };
cplx frozen_average(const std::function<cplx(double e_scale, double domega)>& correlator,
                    const NoiseSpec& noise, FrozenMode mode = FrozenMode::two_point,
                    int order = kDefaultQuadOrder);

// Weak-driving closed forms for the averaged correlators.
double weak_g1_multiplier(const NoiseSpec& noise, double tau);
CorrelationSeries weak_g1_average(const CorrelationSeries& g1_ref, const NoiseSpec& noise);

struct BunchingModel {
    double a = 0.0;
    double b = 0.0;
    double residual_rms = 0.0;
    bool poor_fit = false;
};

double weak_g2_multiplier(const BunchingModel& model, const NoiseSpec& noise, double tau);
CorrelationSeries weak_g2_average(const CorrelationSeries& g2_ref, const BunchingModel& model,
                                  const NoiseSpec& noise);

// Classical intensity-bunching limit of the fitted coefficients,
// a = 4 Q^-2/(1+Q^-2)^2, b = 2 Q^-4/(1+Q^-2)^2; exact as driving -> 0.
BunchingModel weak_limit_bunching(const NoiseSpec& noise);

// Least-squares fit of averaged/reference - 1 onto exp(-tau/tau_c) and
// exp(-2 tau/tau_c).  Points with |reference| < ref_floor are skipped.
BunchingModel fit_bunching(const CorrelationSeries& averaged,
                           const CorrelationSeries& reference, double tau_c,
                           double ref_floor = 1e-6);

// Fitted bunching coefficients on a grid of amplitude-noise strengths,
// cached as a versioned text table and interpolated monotonically in 1/Q.
class BunchingTable {
  public:
    struct Row {
        double q_inv;
        double a;
        double b;
        double residual_rms;
    };

    static BunchingTable compute(const TwoLevelSystem& sys, const DrivingField& field,
                                 const NoiseSpec& noise_template,
                                 const std::vector<double>& q_grid,
                                 int order = kDefaultQuadOrder,
                                 ExecPolicy policy = ExecPolicy::parallel);
    static BunchingTable load(const std::filesystem::path& file);
    void save(const std::filesystem::path& file) const;

    BunchingModel lookup(double q_inv) const;
    const std::vector<Row>& rows() const { return rows_; }
    const std::map<std::string, std::string>& metadata() const { return meta_; }

  private:
    std::vector<Row> rows_;  // ascending in q_inv, implicit (0,0,0) anchor
    std::map<std::string, std::string> meta_;
};

inline const std::vector<double> kDefaultQGrid = {0.1, 0.2, 0.5, 1.0, 2.0, 5.0};

}  // namespace noisycw
