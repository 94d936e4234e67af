#include "noisycw/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace noisycw {

namespace {

enum class McKind { g1, g1_lab, g2, hom };

struct StepPlan {
    double dt = 0.0;
    long m = 1;  // grid nodes per delay-grid step
    long i_equil = 0, i_spacing = 1, i_taumax = 0, i_dt = 0;
    long n_steps = 0;
    std::vector<long> starts;  // start nodes
};

StepPlan make_plan(const TwoLevelSystem& sys, const NoiseSpec& noise,
                   const std::vector<double>& tau_grid, const EnsembleConfig& cfg,
                   double delta_t) {
    if (tau_grid.size() < 2 || tau_grid.front() != 0.0)
        throw validation_error("mc: delay grid must start at 0 with >= 2 points");
    const double h = tau_grid[1] - tau_grid[0];
    if (h <= 0.0) throw validation_error("mc: delay grid must increase");
    for (size_t i = 1; i < tau_grid.size(); ++i)
        if (std::abs(tau_grid[i] - double(i) * h) > 1e-9 * (1.0 + tau_grid.back()))
            throw validation_error("mc: delay grid must be uniform");
    if (cfg.n_traj < 1 || cfg.n_starts < 1)
        throw validation_error("mc: n_traj and n_starts must be positive");

    StepPlan p;
    double dt_cap = cfg.dt > 0.0 ? cfg.dt : std::min(noise.tau_c / 20.0, sys.t2 / 10.0);
    p.m = std::max(1L, long(std::ceil(h / dt_cap - 1e-9)));
    p.dt = h / double(p.m);
    p.i_taumax = long(tau_grid.size() - 1) * p.m;

    const double equil = cfg.equil >= 0.0 ? cfg.equil
                                          : 5.0 * std::max({sys.t1, sys.t2, noise.tau_c});
    p.i_equil = long(std::ceil(equil / p.dt - 1e-9));
    const double spacing =
        cfg.spacing >= 0.0 ? cfg.spacing : 5.0 * std::max(sys.t1, sys.t2);
    p.i_spacing = std::max(1L, long(std::ceil(spacing / p.dt - 1e-9)));

    if (delta_t > 0.0) {
        p.i_dt = std::lround(delta_t / p.dt);
        if (p.i_dt < 1 || std::abs(double(p.i_dt) * p.dt - delta_t) > 1e-9 + 1e-9 * delta_t)
            throw validation_error(
                "mc: interferometer delay must be a positive multiple of the step");
    }

    p.n_steps = p.i_equil + p.i_dt + long(cfg.n_starts - 1) * p.i_spacing + p.i_taumax;
    for (int j = 0; j < cfg.n_starts; ++j)
        p.starts.push_back(p.i_equil + p.i_dt + long(j) * p.i_spacing);
    return p;
}

// right multiplication by S+ on the vectorized matrix
inline StateVec right_splus(const StateVec& v) {
    StateVec out = StateVec::Zero();
    out(0) = v(2);  // (M S+)_gg = M_ge
    out(1) = v(3);  // (M S+)_eg = M_ee
    return out;
}

McSeries run_ensemble(McKind kind, const TwoLevelSystem& sys, const DrivingField& field,
                      const NoiseSpec& noise, const std::vector<double>& tau_grid,
                      double delta_t, const EnsembleConfig& cfg) {
    sys.validate();
    field.validate();
    noise.validate();
    const StepPlan plan = make_plan(sys, noise, tau_grid, cfg, delta_t);
    const LiouvillianFamily fam = liouvillian_family(sys, field);
    const StateVec rho0 = vectorize(steady_state(fam.base));
    const bool quiet = noise.var_domega == 0.0 && noise.var_de_rel == 0.0;

    std::vector<double> grid(size_t(plan.n_steps) + 1);
    for (long i = 0; i <= plan.n_steps; ++i) grid[size_t(i)] = double(i) * plan.dt;

    const size_t n_tau = tau_grid.size();
    const int n_traj = cfg.n_traj;
    std::vector<std::vector<cplx>> traj_vals(size_t(n_traj),
                                             std::vector<cplx>(n_tau, cplx(0.0)));
    std::vector<double> traj_intensity(size_t(n_traj), 0.0);

    LiouvMatrix quiet_prop;
    if (quiet) quiet_prop = (fam.base * plan.dt).exp();

    auto run_one = [&](int r) {
        const NoisePath path = sample_path(noise, grid, cfg.seed, std::uint64_t(r));
        std::vector<LiouvMatrix> prop;
        if (!quiet) {
            prop.resize(size_t(plan.n_steps));
            for (long i = 0; i < plan.n_steps; ++i) {
                const double dw = 0.5 * (path.domega[size_t(i)] + path.domega[size_t(i) + 1]);
                const double de = 0.5 * (path.de_rel[size_t(i)] + path.de_rel[size_t(i) + 1]);
                prop[size_t(i)] = (fam.at(dw, de) * plan.dt).exp();
            }
        }
        auto step = [&](const StateVec& v, long i) -> StateVec {
            return quiet ? StateVec(quiet_prop * v) : StateVec(prop[size_t(i)] * v);
        };

        std::vector<StateVec> rho(size_t(plan.n_steps) + 1);
        rho[0] = rho0;
        for (long i = 0; i < plan.n_steps; ++i) rho[size_t(i) + 1] = step(rho[size_t(i)], i);

        std::vector<cplx>& acc = traj_vals[size_t(r)];
        double intensity = 0.0;

        for (long i0 : plan.starts) {
            intensity += rho[size_t(i0)](3).real();
            if (kind == McKind::hom) {
                // prefix: S- rho(t0 - delta_t) carried up to t0
                std::vector<StateVec> pre(size_t(plan.i_dt) + 1);
                const OperatorMatrix rm1 = unvectorize(rho[size_t(i0 - plan.i_dt)]);
                pre[0] = vectorize(s_minus() * rm1);
                for (long i = 0; i < plan.i_dt; ++i)
                    pre[size_t(i) + 1] = step(pre[size_t(i)], i0 - plan.i_dt + i);
                for (size_t k = 0; k < n_tau; ++k) {
                    const long km = long(k) * plan.m;
                    const long shared = std::min(km, plan.i_dt);
                    StateVec v = right_splus(pre[size_t(shared)]);
                    long node = i0 - plan.i_dt + shared;
                    for (long i = 0; i < std::labs(km - plan.i_dt); ++i, ++node)
                        v = step(v, node);
                    v = right_splus(v);
                    for (long i = 0; i < shared; ++i, ++node) v = step(v, node);
                    cplx val = v(1);  // Tr[S- M]
                    if (!quiet) {
                        const double x = path.phase[size_t(i0)] +
                                         path.phase[size_t(i0 + km - plan.i_dt)] -
                                         path.phase[size_t(i0 + km)] -
                                         path.phase[size_t(i0 - plan.i_dt)];
                        val *= cplx(std::cos(x), std::sin(x));
                    }
                    acc[k] += val;
                }
            } else {
                const OperatorMatrix r0 = unvectorize(rho[size_t(i0)]);
                StateVec v = kind == McKind::g2 ? vectorize(s_minus() * r0 * s_plus())
                                                : vectorize(s_minus() * r0);
                const int readout = kind == McKind::g2 ? 3 : 2;
                for (size_t k = 0; k < n_tau; ++k) {
                    if (k > 0)
                        for (long i = 0; i < plan.m; ++i)
                            v = step(v, i0 + long(k - 1) * plan.m + i);
                    cplx val = v(readout);
                    if (kind == McKind::g1_lab) {
                        const double x = field.lab_freq * tau_grid[k] +
                                         (quiet ? 0.0
                                                : path.phase[size_t(i0 + long(k) * plan.m)] -
                                                      path.phase[size_t(i0)]);
                        val *= cplx(std::cos(x), std::sin(x));
                    }
                    acc[k] += val;
                }
            }
        }
        const double inv = 1.0 / double(plan.starts.size());
        for (cplx& a : acc) a *= inv;
        traj_intensity[size_t(r)] = intensity * inv;
    };

    if (cfg.policy == ExecPolicy::parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
        for (int r = 0; r < n_traj; ++r) run_one(r);
    } else {
        for (int r = 0; r < n_traj; ++r) run_one(r);
    }

    double ibar = 0.0;
    for (double x : traj_intensity) ibar += x;
    ibar /= double(n_traj);
    if (ibar < 1e-14)
        throw undefined_normalization_error("mc: ensemble intensity vanishes");
    const double norm = kind == McKind::g1 || kind == McKind::g1_lab ? ibar : ibar * ibar;

    McSeries out;
    out.mean_intensity = ibar;
    out.dt = plan.dt;
    out.n_traj = n_traj;
    out.series.delays = tau_grid;
    out.series.kind = kind == McKind::g2    ? SeriesKind::g2
                      : kind == McKind::hom ? SeriesKind::hom_cross
                      : kind == McKind::g1  ? SeriesKind::g1_rotating
                                            : SeriesKind::g1_lab;
    out.series.normalized = true;
    out.series.values.assign(n_tau, cplx(0.0));
    out.series.stderrs.assign(n_tau, 0.0);

    for (int r = 0; r < n_traj; ++r)
        for (size_t k = 0; k < n_tau; ++k) out.series.values[k] += traj_vals[size_t(r)][k];
    for (size_t k = 0; k < n_tau; ++k) out.series.values[k] /= norm * double(n_traj);

    if (n_traj > 1) {
        for (size_t k = 0; k < n_tau; ++k) {
            double ss = 0.0;
            for (int r = 0; r < n_traj; ++r) {
                const cplx d = traj_vals[size_t(r)][k] / norm - out.series.values[k];
                ss += std::norm(d);
            }
            out.series.stderrs[k] = std::sqrt(ss / double(n_traj - 1) / double(n_traj));
        }
    }

    if (cfg.keep_trajectories) {
        out.trajectories = std::move(traj_vals);
        for (auto& row : out.trajectories)
            for (cplx& v : row) v /= norm;
    }
    return out;
}

}  // namespace

McSeries mc_g1(const TwoLevelSystem& sys, const DrivingField& field, const NoiseSpec& noise,
               const std::vector<double>& tau_grid, const EnsembleConfig& cfg,
               bool lab_frame) {
    return run_ensemble(lab_frame ? McKind::g1_lab : McKind::g1, sys, field, noise,
                        tau_grid, 0.0, cfg);
}

McSeries mc_g2(const TwoLevelSystem& sys, const DrivingField& field, const NoiseSpec& noise,
               const std::vector<double>& tau_grid, const EnsembleConfig& cfg) {
    return run_ensemble(McKind::g2, sys, field, noise, tau_grid, 0.0, cfg);
}

McSeries mc_hom_cross(const TwoLevelSystem& sys, const DrivingField& field,
                      const NoiseSpec& noise, const std::vector<double>& tau_grid,
                      double delta_t, const EnsembleConfig& cfg) {
    if (!(delta_t > 0.0)) throw validation_error("mc_hom_cross: delta_t must be positive");
    return run_ensemble(McKind::hom, sys, field, noise, tau_grid, delta_t, cfg);
}

}  // namespace noisycw
