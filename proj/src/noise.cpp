#include "noisycw/noise.hpp"

#include <cmath>

#include "noisycw/rk.hpp"
#include "noisycw/rng.hpp"

namespace noisycw {

void NoiseSpec::validate() const {
    if (!(tau_c > 0.0)) throw validation_error("NoiseSpec: tau_c must be positive");
    if (var_domega < 0.0 || var_de_rel < 0.0)
        throw validation_error("NoiseSpec: variances must be nonnegative");
    if (std::abs(epsilon) > 1.0)
        throw validation_error("NoiseSpec: epsilon must lie in [-1, 1]");
}

namespace {

// Per-step innovation coefficients for the reduced (x, y, integral-of-x)
// triple.  The integral channel decorrelates from y once x is given, so a
// two-stage conditional draw reproduces the full 3x3 covariance.
struct StepCoef {
    double a;         // exp(-dt/tau_c)
    double mean_i;    // tau_c (1 - a), integral picked up from the entry value
    double sd_x;      // sqrt(1 - a^2)
    double i_on_x;    // regression coefficient of the integral innovation on x's
    double sd_i;      // conditional std of the integral innovation
};

double integral_variance(double tau_c, double u, double a) {
    // 2 tau_c^2 u - 4 tau_c^2 (1-a) + tau_c^2 (1-a^2), series-guarded
    if (u < 1e-3) {
        const double u3 = u * u * u;
        return tau_c * tau_c * u3 * (2.0 / 3 - 0.5 * u + (7.0 / 30) * u * u);
    }
    return tau_c * tau_c * (2.0 * u - 4.0 * (1.0 - a) + (1.0 - a * a));
}

StepCoef step_coefficients(double tau_c, double dt) {
    StepCoef s;
    const double u = dt / tau_c;
    s.a = std::exp(-u);
    const double om = -std::expm1(-u);  // 1 - a
    const double om2 = -std::expm1(-2.0 * u);
    s.mean_i = tau_c * om;
    s.sd_x = std::sqrt(om2);
    const double cov_ix = tau_c * om * om;
    const double var_i = integral_variance(tau_c, u, s.a);
    s.i_on_x = cov_ix / om2;
    const double cond = var_i - cov_ix * cov_ix / om2;
    s.sd_i = std::sqrt(std::max(cond, 0.0));
    return s;
}

}  // namespace

NoisePath sample_path(const NoiseSpec& spec, const std::vector<double>& grid,
                      std::uint64_t seed, std::uint64_t stream, PhaseMode mode) {
    spec.validate();
    if (grid.size() < 1) throw validation_error("sample_path: empty grid");
    for (size_t i = 1; i < grid.size(); ++i)
        if (grid[i] <= grid[i - 1])
            throw validation_error("sample_path: grid must be strictly increasing");

    const size_t n = grid.size();
    const double sig_w = std::sqrt(spec.var_domega);
    const double sig_e = std::sqrt(spec.var_de_rel);
    const double eps = spec.epsilon;
    const double mix = std::sqrt(std::max(0.0, 1.0 - eps * eps));

    NoisePath path;
    path.grid = grid;
    path.domega.resize(n);
    path.de_rel.resize(n);
    path.phase.assign(n, 0.0);

    // reduced-unit state
    const NormalPair z0 = normal_pair(seed, stream, 0, 0);
    double x = z0.z0;
    double y = eps * z0.z0 + mix * z0.z1;
    path.domega[0] = sig_w * x;
    path.de_rel[0] = sig_e * y;

    const bool uniform = [&] {
        if (n < 3) return true;
        const double d0 = grid[1] - grid[0];
        for (size_t i = 2; i < n; ++i)
            if (std::abs((grid[i] - grid[i - 1]) - d0) > 1e-12 * std::max(1.0, d0))
                return false;
        return true;
    }();
    StepCoef cached{};
    if (uniform && n > 1) cached = step_coefficients(spec.tau_c, grid[1] - grid[0]);

    double phase = 0.0;
    for (size_t i = 1; i < n; ++i) {
        const double dt = grid[i] - grid[i - 1];
        const StepCoef& sc = uniform ? cached : step_coefficients(spec.tau_c, dt);

        const NormalPair za = normal_pair(seed, stream, i, 0);
        const NormalPair zb = normal_pair(seed, stream, i, 1);
        const double xi_x = sc.sd_x * za.z0;
        const double xi_y = eps * xi_x + mix * sc.sd_x * za.z1;
        const double x_prev = x;
        x = sc.a * x + xi_x;
        y = sc.a * y + xi_y;
        path.domega[i] = sig_w * x;
        path.de_rel[i] = sig_e * y;

        if (mode == PhaseMode::exact) {
            const double xi_i = sc.i_on_x * xi_x + sc.sd_i * zb.z0;
            phase += sig_w * (sc.mean_i * x_prev + xi_i);
        } else {
            phase += 0.5 * dt * (path.domega[i - 1] + path.domega[i]);
        }
        path.phase[i] = phase;
    }
    return path;
}

double phase_variance(const NoiseSpec& spec, double t) {
    spec.validate();
    const double at = std::abs(t);
    const double tc = spec.tau_c;
    return 2.0 * spec.var_domega * tc * (at + tc * std::expm1(-at / tc));
}

double blurring_factor(const NoiseSpec& spec, double t, BlurModel model) {
    if (model == BlurModel::exact) return std::exp(-0.5 * phase_variance(spec, t));
    return std::exp(-spec.gamma_l() * std::abs(t));
}

JointGaussian stationary_law(const NoiseSpec& spec) {
    spec.validate();
    JointGaussian g;
    const double c = spec.epsilon * std::sqrt(spec.var_domega * spec.var_de_rel);
    g.cov << spec.var_domega, c, c, spec.var_de_rel;
    return g;
}

ConditionalPropagator joint_propagator(const NoiseSpec& spec, double dt) {
    spec.validate();
    if (dt < 0.0) throw validation_error("joint_propagator: dt must be nonnegative");
    ConditionalPropagator p;
    p.mean_decay = std::exp(-dt / spec.tau_c);
    const double regrown = -std::expm1(-2.0 * dt / spec.tau_c);
    p.cov = regrown * stationary_law(spec).cov;
    return p;
}

std::vector<MomentVec> moment_flow(const NoiseSpec& spec, const MomentVec& init,
                                   const std::vector<double>& t_grid) {
    spec.validate();
    const double eps = spec.epsilon;
    const double tc = spec.tau_c;
    auto rhs = [eps, tc](double, const MomentVec& m, MomentVec& d) {
        d[0] = -m[0] / tc;
        d[1] = -m[1] / tc;
        d[2] = (-2.0 * m[2] + 2.0) / tc;
        d[3] = (-2.0 * m[3] + 2.0) / tc;
        d[4] = (-2.0 * m[4] + 2.0 * eps) / tc;
    };
    ode::Options opt;
    opt.rtol = 1e-10;
    opt.atol = 1e-12;
    return ode::integrate_at(rhs, init, t_grid, opt);
}

}  // namespace noisycw
