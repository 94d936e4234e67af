#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "noisycw/config.hpp"
#include "noisycw/dynamics.hpp"
#include "noisycw/figures.hpp"
#include "noisycw/hom.hpp"
#include "noisycw/manifest.hpp"
#include "noisycw/montecarlo.hpp"

namespace fs = std::filesystem;
using namespace noisycw;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitRegime = 3;
constexpr int kCliQuadOrder = 16;
constexpr double kMinBlurDelayProduct = 3.0;

struct CommonOpts {
    std::optional<std::uint64_t> seed;
    int threads = 0;
    bool override_regime = false;
    std::string out_dir = ".";
    std::string format = "csv";
};

void apply_common(const CommonOpts& opts) {
    if (opts.format != "csv")
        throw validation_error("unsupported --format '" + opts.format + "'");
#ifdef _OPENMP
    if (opts.threads > 0) omp_set_num_threads(opts.threads);
#endif
    fs::create_directories(opts.out_dir);
}

int threads_in_use() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string regime_line(const RegimeReport& r, const std::string& branch) {
    std::ostringstream os;
    os << "bpp_ok=" << (r.bpp_ok ? "true" : "false")
       << " pseudo_adiabatic_ok=" << (r.pseudo_adiabatic_ok ? "true" : "false")
       << " frame_decoupled=" << (r.frame_decoupled ? "true" : "false")
       << " monte_carlo_required=" << (r.monte_carlo_required ? "true" : "false");
    if (!branch.empty()) os << " branch=" << branch;
    return os.str();
}

bool wants(const RunConfig& cfg, SeriesKind kind) {
    if (cfg.outputs.empty()) return true;
    for (SeriesKind k : cfg.outputs)
        if (k == kind) return true;
    return false;
}

using Header = std::vector<std::pair<std::string, std::string>>;

Header base_header(const RunConfig& cfg, const std::string& branch) {
    Header h;
    h.emplace_back("t1_ns", fmt(cfg.system.t1));
    h.emplace_back("t2_ns", fmt(cfg.system.t2));
    h.emplace_back("rabi_mean_rad_ns", fmt(cfg.field.rabi_mean));
    h.emplace_back("detuning_rad_ns", fmt(cfg.field.detuning));
    h.emplace_back("tau_c_ns", fmt(cfg.noise.tau_c));
    h.emplace_back("var_domega_rad2_ns2", fmt(cfg.noise.var_domega));
    h.emplace_back("var_de_rel", fmt(cfg.noise.var_de_rel));
    h.emplace_back("epsilon", fmt(cfg.noise.epsilon));
    h.emplace_back("branch", branch);
    return h;
}

void finish(const CommonOpts& opts, const std::string& command, const RunConfig* cfg,
            const std::string& regime, const std::vector<fs::path>& files,
            std::uint64_t seed,
            std::chrono::steady_clock::time_point t0) {
    RunManifest m;
    m.command = command;
    if (cfg) m.config_echo = cfg->echo();
    m.seed = seed;
    m.threads = threads_in_use();
    m.regime_summary = regime;
    m.regime_overridden = opts.override_regime;
    m.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (const fs::path& f : files) m.add_file(f);
    m.save(fs::path(opts.out_dir) / "manifest.txt");
    for (const fs::path& f : files) std::cout << "wrote " << f.string() << "\n";
}

// quiet -> plain regression; fast noise -> regression with the extra
// motional-narrowing dissipators; slow noise -> quadrature averaging;
// otherwise trajectories.  --override-regime forces the analytic chain.
std::string pick_branch(const RunConfig& cfg, const RegimeReport& rep,
                        bool override_regime) {
    const bool quiet = cfg.noise.var_domega == 0.0 && cfg.noise.var_de_rel == 0.0;
    if (quiet) return "regression";
    if (rep.bpp_ok) return "regression_bpp";
    if (rep.pseudo_adiabatic_ok) return "quadrature";
    if (override_regime)
        return rep.ratios.at("adiabatic") < rep.ratios.at("phase_freq")
                   ? "quadrature"
                   : "regression_bpp";
    return "monte_carlo";
}

CorrelationSeries compute_g1(const RunConfig& cfg, const std::string& branch) {
    const std::vector<double> grid = cfg.grid.resolve();
    if (branch == "regression") return g1_rotating(cfg.system, cfg.field, grid);
    if (branch == "regression_bpp")
        return g1_rotating(cfg.system, cfg.field, grid,
                           bpp_collapse_ops(cfg.field, cfg.noise));
    if (branch == "quadrature")
        return averaged_g1_series(cfg.system, cfg.field, cfg.noise, grid,
                                  kCliQuadOrder, cfg.ensemble.policy);
    return mc_g1(cfg.system, cfg.field, cfg.noise, grid, cfg.ensemble).series;
}

CorrelationSeries compute_g2(const RunConfig& cfg, const std::string& branch) {
    const std::vector<double> grid = cfg.grid.resolve();
    if (branch == "regression") return g2_rotating(cfg.system, cfg.field, grid);
    if (branch == "regression_bpp")
        return g2_rotating(cfg.system, cfg.field, grid,
                           bpp_collapse_ops(cfg.field, cfg.noise));
    if (branch == "quadrature")
        return averaged_g2_series(cfg.system, cfg.field, cfg.noise, grid,
                                  kCliQuadOrder, cfg.ensemble.policy);
    return mc_g2(cfg.system, cfg.field, cfg.noise, grid, cfg.ensemble).series;
}

int run_simulate(const std::string& config_path, const std::string& target,
                 const CommonOpts& opts) {
    const auto t0 = std::chrono::steady_clock::now();
    apply_common(opts);
    RunConfig cfg = RunConfig::load(config_path);
    if (opts.seed) cfg.ensemble.seed = *opts.seed;

    const RegimeReport report =
        regime_classify(cfg.system, cfg.field, cfg.noise, kDefaultRegimeTheta,
                        cfg.hom ? cfg.hom->delay : 0.0);
    const std::string branch = pick_branch(cfg, report, opts.override_regime);
    std::vector<fs::path> files;
    std::vector<std::string> warnings;

    if (target == "g1") {
        const CorrelationSeries rot = compute_g1(cfg, branch);
        if (wants(cfg, SeriesKind::g1_rotating)) {
            const fs::path p = fs::path(opts.out_dir) / "g1_rotating.csv";
            write_series_csv(p, rot, base_header(cfg, branch));
            files.push_back(p);
        }
        const bool lab_matters =
            cfg.noise.gamma_l() > 0.0 || cfg.field.lab_freq != 0.0;
        if (lab_matters && wants(cfg, SeriesKind::g1_lab)) {
            CorrelationSeries lab;
            if (branch == "monte_carlo")
                lab = mc_g1(cfg.system, cfg.field, cfg.noise, cfg.grid.resolve(),
                            cfg.ensemble, true)
                          .series;
            else
                lab = g1_lab(rot, cfg.noise, cfg.field.lab_freq);
            const fs::path p = fs::path(opts.out_dir) / "g1_lab.csv";
            write_series_csv(p, lab, base_header(cfg, branch));
            files.push_back(p);
        }
    } else if (target == "g2") {
        const CorrelationSeries s = compute_g2(cfg, branch);
        const fs::path p = fs::path(opts.out_dir) / "g2.csv";
        write_series_csv(p, s, base_header(cfg, branch));
        files.push_back(p);
    } else if (target == "hom") {
        if (!cfg.hom)
            throw validation_error("config field 'hom': required for the hom target");
        HOMSetup setup = *cfg.hom;
        if (setup.gamma_l == 0.0) setup.gamma_l = cfg.noise.gamma_l();

        const bool one_photon_suppressed =
            setup.gamma_l * setup.delay >= kMinBlurDelayProduct;
        const bool blur_decoupled =
            !(cfg.noise.var_domega > 0.0) ||
            setup.gamma_l * cfg.noise.tau_c < report.theta;
        if ((!one_photon_suppressed || !blur_decoupled) && !opts.override_regime) {
            std::cerr << "refusing the hom target: "
                      << (!one_photon_suppressed
                              ? "gamma_l * delay < 3, one-photon interference terms "
                                "are not negligible"
                              : "gamma_l * tau_c exceeds theta, blur is coupled to "
                                "the emitter evolution")
                      << "\n"
                      << report.summary()
                      << "rerun with --override-regime to force the assembly\n";
            return kExitRegime;
        }

        const std::vector<double> requested = cfg.grid.resolve();
        std::vector<double> out_grid;
        if (requested.front() < 0.0) {
            out_grid = requested;
        } else {
            CorrelationSeries tmp;
            tmp.delays = requested;
            tmp.values.assign(requested.size(), 0.0);
            out_grid = mirror_symmetric(tmp, false).delays;
        }
        const double cover = std::abs(out_grid.back()) + setup.delay + 1.0;
        const double step =
            requested.size() > 1 ? requested[1] - requested.front() : 0.05;
        const std::vector<double> half = uniform_grid(0.0, cover, std::min(step, 0.25));
        const double emitter_scale = std::max(cfg.system.t1, cfg.system.t2);

        CorrelationSeries par, perp;
        HOMSetup perp_setup = setup;
        perp_setup.pol_angle = std::acos(-1.0) / 2.0;
        if (cfg.noise.q_inv2() > 0.0) {
            DrivingField mean_field = cfg.field;
            const CorrelationSeries g1_ref =
                mirror_symmetric(g1_rotating(cfg.system, mean_field, half), true);
            const CorrelationSeries g2_ref =
                mirror_symmetric(g2_rotating(cfg.system, mean_field, half), false);
            const BunchingModel model = weak_limit_bunching(cfg.noise);
            par = g2x_weak_noisy(g2_ref, g1_ref, setup, cfg.noise, model, out_grid,
                                 emitter_scale, &warnings);
            perp = g2x_weak_noisy(g2_ref, g1_ref, perp_setup, cfg.noise, model,
                                  out_grid, emitter_scale, &warnings);
        } else {
            std::vector<OperatorMatrix> extra;
            if (branch == "regression_bpp")
                extra = bpp_collapse_ops(cfg.field, cfg.noise);
            const CorrelationSeries g1_in = mirror_symmetric(
                g1_rotating(cfg.system, cfg.field, half, extra), true);
            const CorrelationSeries g2_in = mirror_symmetric(
                g2_rotating(cfg.system, cfg.field, half, extra), false);
            par = g2x_bpp(g2_in, g1_in, setup, out_grid, emitter_scale, &warnings);
            perp = g2x_bpp(g2_in, g1_in, perp_setup, out_grid, emitter_scale,
                           &warnings);
        }
        if (setup.irf_fwhm > 0.0) {
            par = convolve_irf(par, setup.irf_fwhm);
            perp = convolve_irf(perp, setup.irf_fwhm);
        }

        Header h = base_header(cfg, branch);
        h.emplace_back("delay_ns", fmt(setup.delay));
        h.emplace_back("gamma_l_inv_ns", fmt(setup.gamma_l));
        h.emplace_back("irf_fwhm_ns", fmt(setup.irf_fwhm));
        auto put = [&](const std::string& name, const CorrelationSeries& s) {
            const fs::path p = fs::path(opts.out_dir) / name;
            write_series_csv(p, s, h);
            files.push_back(p);
        };
        if (wants(cfg, SeriesKind::g2x_par)) put("g2x_par.csv", par);
        if (wants(cfg, SeriesKind::g2x_perp)) put("g2x_perp.csv", perp);
        if (wants(cfg, SeriesKind::visibility))
            put("visibility.csv", visibility(par, perp, &warnings));
    } else {
        throw validation_error("unknown simulate target '" + target + "'");
    }

    for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
    finish(opts, "simulate " + target, &cfg, regime_line(report, branch), files,
           cfg.ensemble.seed, t0);
    return 0;
}

int run_reproduce(const std::string& figure, const CommonOpts& opts, int quad_order) {
    const auto t0 = std::chrono::steady_clock::now();
    apply_common(opts);
    std::vector<std::string> warnings;
    const std::vector<fs::path> files = reproduce_figure(
        figure, opts.out_dir, quad_order, ExecPolicy::parallel, &warnings);
    for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
    finish(opts, "reproduce " + figure, nullptr, "", files,
           opts.seed.value_or(0), t0);
    return 0;
}

int run_regimes(const std::string& config_path, const CommonOpts& opts) {
    RunConfig cfg = RunConfig::load(config_path);
    const RegimeReport report =
        regime_classify(cfg.system, cfg.field, cfg.noise, kDefaultRegimeTheta,
                        cfg.hom ? cfg.hom->delay : 0.0);
    std::cout << report.summary();
    std::cout << "suggested branch: "
              << pick_branch(cfg, report, opts.override_regime) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"correlation functions of a noisily driven two-level emitter"};
    app.require_subcommand(1);

    CommonOpts opts;
    auto add_common = [&](CLI::App* cmd, bool with_seed) {
        cmd->add_option("--threads", opts.threads, "OpenMP thread cap");
        cmd->add_option("--out-dir", opts.out_dir, "output directory");
        cmd->add_option("--format", opts.format, "output format (csv)");
        cmd->add_flag("--override-regime", opts.override_regime,
                      "proceed despite regime checks");
        if (with_seed) cmd->add_option("--seed", opts.seed, "master seed override");
    };

    std::string config_path, target, figure;
    int quad_order = 0;

    CLI::App* sim = app.add_subcommand("simulate", "run one configured correlation");
    sim->add_option("target", target, "g1, g2 or hom")->required();
    sim->add_option("config", config_path, "JSON run configuration")->required();
    add_common(sim, true);

    CLI::App* rep = app.add_subcommand("reproduce", "emit a pinned data set");
    rep->add_option("figure", figure, "fig2 fig3 fig4 fig6 fig7 fig8")->required();
    rep->add_option("--quad-order", quad_order, "override the quadrature order");
    add_common(rep, true);

    CLI::App* reg = app.add_subcommand("regimes", "print the regime report");
    reg->add_option("config", config_path, "JSON run configuration")->required();
    add_common(reg, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (sim->parsed()) return run_simulate(config_path, target, opts);
        if (rep->parsed()) return run_reproduce(figure, opts, quad_order);
        return run_regimes(config_path, opts);
    } catch (const validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
}
