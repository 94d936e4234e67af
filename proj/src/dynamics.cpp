#include "noisycw/dynamics.hpp"

#include <cmath>
#include <sstream>

namespace noisycw {

void TwoLevelSystem::validate() const {
    if (!(t1 > 0.0) || !(t2 > 0.0))
        throw validation_error("TwoLevelSystem: t1 and t2 must be positive");
    if (t2 > 2.0 * t1 * (1.0 + 1e-12))
        throw validation_error("TwoLevelSystem: t2 must not exceed 2 t1");
}

void DrivingField::validate() const {
    if (rabi_mean < 0.0)
        throw validation_error("DrivingField: rabi_mean must be nonnegative");
    if (!std::isfinite(rabi_mean) || !std::isfinite(detuning) || !std::isfinite(lab_freq))
        throw validation_error("DrivingField: non-finite entry");
}

double saturation(const TwoLevelSystem& sys, const DrivingField& field) {
    sys.validate();
    field.validate();
    const double d = field.detuning * sys.t2;
    return field.rabi_mean * field.rabi_mean * sys.t1 * sys.t2 / (1.0 + d * d);
}

OperatorMatrix tls_hamiltonian(const DrivingField& field) {
    field.validate();
    return field.detuning * s_number() + field.rabi_mean * s_x();
}

std::vector<OperatorMatrix> tls_collapse_ops(const TwoLevelSystem& sys) {
    sys.validate();
    std::vector<OperatorMatrix> ops;
    ops.push_back(std::sqrt(1.0 / sys.t1) * s_minus());
    const double deph = 1.0 / sys.t2 - 0.5 / sys.t1;  // pure dephasing share of 1/T2
    if (deph > 1e-15) ops.push_back(std::sqrt(2.0 * deph) * s_z());
    return ops;
}

LiouvillianFamily liouvillian_family(const TwoLevelSystem& sys, const DrivingField& field) {
    LiouvillianFamily f;
    f.base = build_liouvillian(tls_hamiltonian(field), tls_collapse_ops(sys));
    f.d_detune = build_liouvillian(s_number(), {});
    f.d_rabi = build_liouvillian(field.rabi_mean * s_x(), {});
    return f;
}

BppRates bpp_rates(const DrivingField& field, const NoiseSpec& noise) {
    field.validate();
    noise.validate();
    const double omega = field.rabi_mean;
    const double cov_rel = noise.epsilon * std::sqrt(noise.var_domega * noise.var_de_rel);
    BppRates r;
    r.c_sx = 2.0 * noise.tau_c * (omega * omega * noise.var_de_rel - omega * cov_rel);
    r.c_sz = 2.0 * noise.tau_c * (noise.var_domega - omega * cov_rel);
    r.c_mix = 2.0 * noise.tau_c * omega * cov_rel;
    return r;
}

std::vector<OperatorMatrix> bpp_collapse_ops(const DrivingField& field,
                                             const NoiseSpec& noise) {
    const BppRates r = bpp_rates(field, noise);
    auto guard = [](double c, const char* name) {
        if (c < -1e-15)
            throw parameter_domain_error(std::string("bpp_collapse_ops: negative rate for ") +
                                         name + " channel");
        return std::max(c, 0.0);
    };
    std::vector<OperatorMatrix> ops;
    const double c1 = guard(r.c_sx, "Sx");
    const double c2 = guard(r.c_sz, "Sz");
    const double c3 = guard(r.c_mix, "Sx+Sz");
    if (c1 > 0.0) ops.push_back(std::sqrt(c1) * s_x());
    if (c2 > 0.0) ops.push_back(std::sqrt(c2) * s_z());
    if (c3 > 0.0) ops.push_back(std::sqrt(c3) * (s_x() + s_z()));
    return ops;
}

namespace {

void check_tau_grid(const std::vector<double>& grid) {
    if (grid.empty()) throw validation_error("correlator: empty delay grid");
    if (grid.front() < -1e-12)
        throw validation_error("correlator: delays must be nonnegative; mirror afterwards");
    for (size_t i = 1; i < grid.size(); ++i)
        if (grid[i] <= grid[i - 1])
            throw validation_error("correlator: delay grid must be strictly increasing");
}

struct RegressionSetup {
    LiouvMatrix liouv;
    OperatorMatrix rho_ss;
    double intensity;
};

RegressionSetup regression_setup(const TwoLevelSystem& sys, const DrivingField& field,
                                 const std::vector<OperatorMatrix>& extra_collapse) {
    auto collapse = tls_collapse_ops(sys);
    collapse.insert(collapse.end(), extra_collapse.begin(), extra_collapse.end());
    RegressionSetup s;
    s.liouv = build_liouvillian(tls_hamiltonian(field), collapse);
    s.rho_ss = steady_state(s.liouv);
    s.intensity = s.rho_ss(1, 1).real();
    return s;
}

// Walks the delay grid once, propagating the seeded state stepwise; a single
// matrix exponential is reused on uniform grids.
std::vector<cplx> regression_walk(const RegressionSetup& rs, const OperatorMatrix& seed,
                                  const std::vector<double>& grid, int readout_index) {
    std::vector<cplx> out(grid.size());
    StateVec v = vectorize(seed);

    const bool uniform = [&] {
        if (grid.size() < 3) return false;
        const double d0 = grid[1] - grid[0];
        for (size_t i = 2; i < grid.size(); ++i)
            if (std::abs((grid[i] - grid[i - 1]) - d0) > 1e-9 * std::max(1.0, d0)) return false;
        return true;
    }();

    double t_cur = 0.0;
    if (uniform) {
        const double step = (grid.back() - grid.front()) / double(grid.size() - 1);
        const LiouvMatrix p_step = propagate(rs.liouv, step);
        if (grid.front() > 1e-12) v = propagate(rs.liouv, grid.front()) * v;
        out[0] = v(readout_index);
        for (size_t i = 1; i < grid.size(); ++i) {
            v = p_step * v;
            out[i] = v(readout_index);
        }
        return out;
    }
    for (size_t i = 0; i < grid.size(); ++i) {
        const double dt = grid[i] - t_cur;
        if (dt > 1e-15) v = propagate(rs.liouv, dt) * v;
        t_cur = grid[i];
        out[i] = v(readout_index);
    }
    return out;
}

}  // namespace

CorrelationSeries g1_rotating(const TwoLevelSystem& sys, const DrivingField& field,
                              const std::vector<double>& tau_grid,
                              const std::vector<OperatorMatrix>& extra_collapse) {
    check_tau_grid(tau_grid);
    const RegressionSetup rs = regression_setup(sys, field, extra_collapse);
    if (rs.intensity < 1e-14)
        throw undefined_normalization_error(
            "g1_rotating: steady intensity vanishes, nothing to normalize by");
    // G1(tau) = <S+(tau) S-(0)> = [e^{L tau} vec(S- rho)]_{ge}
    const std::vector<cplx> raw =
        regression_walk(rs, s_minus() * rs.rho_ss, tau_grid, 2);
    CorrelationSeries s;
    s.delays = tau_grid;
    s.values.resize(raw.size());
    for (size_t i = 0; i < raw.size(); ++i) s.values[i] = raw[i] / rs.intensity;
    s.kind = SeriesKind::g1_rotating;
    s.normalized = true;
    return s;
}

CorrelationSeries g2_rotating(const TwoLevelSystem& sys, const DrivingField& field,
                              const std::vector<double>& tau_grid,
                              const std::vector<OperatorMatrix>& extra_collapse) {
    check_tau_grid(tau_grid);
    const RegressionSetup rs = regression_setup(sys, field, extra_collapse);
    if (rs.intensity < 1e-14)
        throw undefined_normalization_error(
            "g2_rotating: steady intensity vanishes, nothing to normalize by");
    // G2(tau) = <S+ S+S- S-> chain = [e^{L tau} vec(S- rho S+)]_{ee}
    const std::vector<cplx> raw =
        regression_walk(rs, s_minus() * rs.rho_ss * s_plus(), tau_grid, 3);
    CorrelationSeries s;
    s.delays = tau_grid;
    s.values.resize(raw.size());
    const double norm = rs.intensity * rs.intensity;
    for (size_t i = 0; i < raw.size(); ++i) s.values[i] = raw[i] / norm;
    s.kind = SeriesKind::g2;
    s.normalized = true;
    return s;
}

CorrelationSeries g1_lab(const CorrelationSeries& g1_rot, const NoiseSpec& noise,
                         double lab_freq) {
    g1_rot.validate();
    noise.validate();
    if (g1_rot.kind != SeriesKind::g1_rotating)
        throw validation_error("g1_lab: input must be a rotating-frame g1 series");
    CorrelationSeries s = g1_rot;
    const double gl = noise.gamma_l();
    for (size_t i = 0; i < s.size(); ++i) {
        const double tau = s.delays[i];
        s.values[i] *= std::exp(-gl * std::abs(tau)) *
                       std::exp(cplx(0.0, lab_freq * tau));
    }
    s.kind = SeriesKind::g1_lab;
    return s;
}

RegimeReport regime_classify(const TwoLevelSystem& sys, const DrivingField& field,
                             const NoiseSpec& noise, double theta, double hom_delay) {
    sys.validate();
    field.validate();
    noise.validate();
    if (!(theta > 0.0)) throw validation_error("regime_classify: theta must be positive");

    RegimeReport r;
    r.theta = theta;
    const double sd_w = std::sqrt(noise.var_domega);
    const double sd_e = std::sqrt(noise.var_de_rel);
    r.ratios["phase_freq"] = sd_w * noise.tau_c;
    r.ratios["phase_amp"] = field.rabi_mean * sd_e * noise.tau_c;
    r.ratios["drive"] = field.rabi_mean * noise.tau_c;
    r.ratios["adiabatic"] = std::max(sys.t1, sys.t2) / noise.tau_c;
    r.ratios["decouple"] = noise.gamma_l() * noise.tau_c;
    if (hom_delay > 0.0) r.ratios["hom_decouple"] = noise.gamma_l() * hom_delay;

    r.bpp_ok = r.ratios["phase_freq"] < theta && r.ratios["phase_amp"] < theta;
    r.pseudo_adiabatic_ok = r.ratios["adiabatic"] < theta;
    r.frame_decoupled = r.ratios["decouple"] < theta;
    r.monte_carlo_required = !(r.bpp_ok || r.pseudo_adiabatic_ok);
    return r;
}

std::string RegimeReport::summary() const {
    std::ostringstream os;
    os << "regime report (theta = " << theta << ")\n";
    for (const auto& [k, v] : ratios) os << "  ratio " << k << " = " << v << "\n";
    os << "  bpp_ok               = " << (bpp_ok ? "yes" : "no") << "\n";
    os << "  pseudo_adiabatic_ok  = " << (pseudo_adiabatic_ok ? "yes" : "no") << "\n";
    os << "  frame_decoupled      = " << (frame_decoupled ? "yes" : "no") << "\n";
    os << "  monte_carlo_required = " << (monte_carlo_required ? "yes" : "no") << "\n";
    return os.str();
}

}  // namespace noisycw
