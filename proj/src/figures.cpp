#include "noisycw/figures.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "noisycw/dynamics.hpp"
#include "noisycw/hom.hpp"

namespace noisycw {

namespace {

namespace fs = std::filesystem;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Every pinned preset parameter, in one place.
struct Presets {
    TwoLevelSystem sys{0.34, 0.5};  // ns
    double tau_c = 4.0;             // ns

    double weak_rabi = 0.1;    // rad/ns, saturation 1.7e-3
    double strong_rabi = 2.0;  // rad/ns, saturation 0.68
    double weak_sigma = 0.1;   // rad/ns, both noise spreads at Q = 1
    double strong_sigma = 2.0;
    std::vector<double> epsilons{0.0, 0.8};
    double corr_tau_max = 20.0;  // ns
    double corr_step = 0.25;     // ns
    int corr_order = 12;

    std::vector<double> q_grid{0.1, 0.2, 0.5, 1.0, 2.0, 5.0};
    int bunching_order = 12;

    double hom_delay = 43.0;  // ns
    double hom_q_inv2 = 0.03;
    double hom_tl = 20.0;  // ns
    std::vector<double> hom_tl_set{0.0, 20.0, kInf};
    std::vector<double> hom_q_set{1.0, kInf};
    double hom_tau_max = 60.0;  // ns
    double hom_step = 0.1;      // ns

    std::vector<double> ctw_tl_set{1.0, 2.0, 4.0, 6.0, 10.0, 14.0, 20.0, 28.0, 43.0, 60.0};
    std::vector<double> ctw_q_inv2_set{0.0, 0.03, 0.3, 1.0};
    double ctw_step = 0.05;  // ns

    double sat_lo = 1e-4;  // fig8 sweep bounds, log-spaced
    double sat_hi = 1.0;
    int sat_points = 13;
};
const Presets kP;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

using Header = std::vector<std::pair<std::string, std::string>>;

Header run_header(const TwoLevelSystem& sys, const DrivingField& field,
                  const NoiseSpec& noise, int order) {
    Header h;
    h.emplace_back("t1_ns", fmt(sys.t1));
    h.emplace_back("t2_ns", fmt(sys.t2));
    h.emplace_back("rabi_mean_rad_ns", fmt(field.rabi_mean));
    h.emplace_back("detuning_rad_ns", fmt(field.detuning));
    h.emplace_back("tau_c_ns", fmt(noise.tau_c));
    h.emplace_back("var_domega_rad2_ns2", fmt(noise.var_domega));
    h.emplace_back("var_de_rel", fmt(noise.var_de_rel));
    h.emplace_back("epsilon", fmt(noise.epsilon));
    if (order > 0) h.emplace_back("quad_order", std::to_string(order));
    return h;
}

void append_hom_header(Header& h, const HOMSetup& setup, const BunchingModel& model) {
    h.emplace_back("r_int", fmt(setup.r_int));
    h.emplace_back("t_int", fmt(setup.t_int));
    h.emplace_back("delay_ns", fmt(setup.delay));
    h.emplace_back("pol_angle_rad", fmt(setup.pol_angle));
    h.emplace_back("gamma_l_inv_ns", fmt(setup.gamma_l));
    h.emplace_back("model_a", fmt(model.a));
    h.emplace_back("model_b", fmt(model.b));
}

void write_table(const fs::path& file, const Header& header,
                 const std::vector<std::string>& columns,
                 const std::vector<std::vector<double>>& rows) {
    std::ostringstream out;
    out << "# noisycw table v1\n";
    for (const auto& [k, v] : header) out << "# " << k << "=" << v << "\n";
    out << "# columns: ";
    for (size_t i = 0; i < columns.size(); ++i)
        out << (i ? "," : "") << columns[i];
    out << "\n";
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << fmt(row[i]);
        out << "\n";
    }

    const fs::path tmp = file.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw validation_error("cannot write " + tmp.string());
        f << out.str();
    }
    fs::rename(tmp, file);
}

// fig2 and fig4 share one layout and differ only in the drive strength.
std::vector<fs::path> correlation_panels(const std::string& stem, double rabi,
                                         double sigma, const fs::path& out_dir,
                                         int order, ExecPolicy policy) {
    const TwoLevelSystem sys = kP.sys;
    DrivingField field;
    field.rabi_mean = rabi;
    const std::vector<double> grid = uniform_grid(0.0, kP.corr_tau_max, kP.corr_step);

    NoiseSpec noise;
    noise.tau_c = kP.tau_c;
    noise.var_domega = sigma * sigma;
    noise.var_de_rel = (sigma / rabi) * (sigma / rabi);

    std::vector<fs::path> files;
    auto put = [&](const std::string& name, const CorrelationSeries& s) {
        const fs::path p = out_dir / name;
        write_series_csv(p, s, run_header(sys, field, noise, order));
        files.push_back(p);
    };

    const CorrelationSeries g1_ref = g1_rotating(sys, field, grid);
    const CorrelationSeries g2_ref = g2_rotating(sys, field, grid);
    put(stem + "a_g1_noise_free.csv", g1_ref);
    put(stem + "b_g2_noise_free.csv", g2_ref);
    put(stem + "a_g1_weak_theory.csv", weak_g1_average(g1_ref, noise));
    put(stem + "b_g2_weak_theory.csv",
        weak_g2_average(g2_ref, weak_limit_bunching(noise), noise));

    for (double eps : kP.epsilons) {
        noise.epsilon = eps;
        char tag[16];
        std::snprintf(tag, sizeof tag, "eps%02d", int(eps * 10.0 + 0.5));
        put(stem + "a_g1_" + tag + ".csv",
            averaged_g1_series(sys, field, noise, grid, order, policy));
        put(stem + "b_g2_" + tag + ".csv",
            averaged_g2_series(sys, field, noise, grid, order, policy));
    }
    return files;
}

std::vector<fs::path> fig3(const fs::path& out_dir, int order, ExecPolicy policy) {
    const TwoLevelSystem sys = kP.sys;
    DrivingField field;
    field.rabi_mean = kP.weak_rabi;

    NoiseSpec noise;
    noise.tau_c = kP.tau_c;
    noise.var_domega = kP.weak_sigma * kP.weak_sigma;
    noise.var_de_rel = 1.0;

    std::vector<fs::path> files;
    const std::vector<double> grid =
        uniform_grid(0.0, 5.0 * kP.tau_c, kP.tau_c / 12.0);
    const CorrelationSeries g2_ref = g2_rotating(sys, field, grid);
    const CorrelationSeries g2_avg =
        averaged_g2_series(sys, field, noise, grid, order, policy);
    const BunchingModel fit = fit_bunching(g2_avg, g2_ref, kP.tau_c, 1e-9);

    CorrelationSeries ratio, model;
    ratio.kind = model.kind = SeriesKind::other;
    for (size_t i = 0; i < grid.size(); ++i) {
        if (std::abs(g2_ref.values[i]) < 1e-9) continue;
        const double tau = grid[i];
        ratio.delays.push_back(tau);
        ratio.values.push_back((g2_avg.values[i] / g2_ref.values[i]).real() - 1.0);
        model.delays.push_back(tau);
        model.values.push_back(fit.a * std::exp(-tau / kP.tau_c) +
                               fit.b * std::exp(-2.0 * tau / kP.tau_c));
    }
    Header h = run_header(sys, field, noise, order);
    h.emplace_back("fit_a", fmt(fit.a));
    h.emplace_back("fit_b", fmt(fit.b));
    h.emplace_back("fit_residual_rms", fmt(fit.residual_rms));
    write_series_csv(out_dir / "fig3a_ratio.csv", ratio, h);
    write_series_csv(out_dir / "fig3a_fit.csv", model, h);
    files.push_back(out_dir / "fig3a_ratio.csv");
    files.push_back(out_dir / "fig3a_fit.csv");

    const BunchingTable table =
        BunchingTable::compute(sys, field, noise, kP.q_grid, order, policy);
    table.save(out_dir / "fig3b_bunching.csv");
    files.push_back(out_dir / "fig3b_bunching.csv");
    return files;
}

struct HomRefs {
    CorrelationSeries g1;
    CorrelationSeries g2;
};

HomRefs hom_references(double rabi, double cover, double step) {
    const TwoLevelSystem sys = kP.sys;
    DrivingField field;
    field.rabi_mean = rabi;
    const std::vector<double> half = uniform_grid(0.0, cover, step);
    HomRefs refs;
    refs.g1 = mirror_symmetric(g1_rotating(sys, field, half), true);
    refs.g2 = mirror_symmetric(g2_rotating(sys, field, half), false);
    return refs;
}

std::string tl_tag(double tl) {
    if (tl == 0.0) return "tl0";
    if (std::isinf(tl)) return "tlinf";
    char buf[24];
    std::snprintf(buf, sizeof buf, "tl%g", tl);
    return buf;
}

std::vector<fs::path> fig6(const fs::path& out_dir, std::vector<std::string>* warnings) {
    const double cover = kP.hom_tau_max + kP.hom_delay + 1.0;
    const HomRefs refs = hom_references(kP.weak_rabi, cover, kP.ctw_step);
    const std::vector<double> out_grid =
        uniform_grid(-kP.hom_tau_max, kP.hom_tau_max, kP.hom_step);
    const double emitter_scale = std::max(kP.sys.t1, kP.sys.t2);

    DrivingField field;
    field.rabi_mean = kP.weak_rabi;

    std::vector<fs::path> files;
    auto put = [&](const std::string& name, const CorrelationSeries& s,
                   const NoiseSpec& noise, const HOMSetup& setup,
                   const BunchingModel& model) {
        Header h = run_header(kP.sys, field, noise, 0);
        append_hom_header(h, setup, model);
        const fs::path p = out_dir / name;
        write_series_csv(p, s, h);
        files.push_back(p);
    };

    NoiseSpec noise_a;
    noise_a.tau_c = kP.tau_c;
    noise_a.var_de_rel = kP.hom_q_inv2;
    const BunchingModel model_a = weak_limit_bunching(noise_a);
    for (double tl : kP.hom_tl_set) {
        HOMSetup setup;
        setup.delay = kP.hom_delay;
        setup.gamma_l = tl == 0.0 ? kInf : 1.0 / tl;
        const CorrelationSeries par =
            g2x_weak_noisy(refs.g2, refs.g1, setup, noise_a, model_a, out_grid,
                           emitter_scale, warnings);
        put("fig6a_par_" + tl_tag(tl) + ".csv", par, noise_a, setup, model_a);
    }

    CorrelationSeries par_q1, perp_q1;
    for (double q : kP.hom_q_set) {
        NoiseSpec noise_b;
        noise_b.tau_c = kP.tau_c;
        noise_b.var_de_rel = std::isinf(q) ? 0.0 : 1.0 / (q * q);
        const BunchingModel model_b = weak_limit_bunching(noise_b);
        HOMSetup setup;
        setup.delay = kP.hom_delay;
        setup.gamma_l = 1.0 / kP.hom_tl;
        const CorrelationSeries par =
            g2x_weak_noisy(refs.g2, refs.g1, setup, noise_b, model_b, out_grid,
                           emitter_scale, warnings);
        const std::string tag = std::isinf(q) ? "qinf" : "q1";
        put("fig6b_par_" + tag + ".csv", par, noise_b, setup, model_b);
        if (!std::isinf(q)) {
            par_q1 = par;
            setup.pol_angle = std::acos(-1.0) / 2.0;
            perp_q1 = g2x_weak_noisy(refs.g2, refs.g1, setup, noise_b, model_b,
                                     out_grid, emitter_scale, warnings);
            put("fig6b_perp_q1.csv", perp_q1, noise_b, setup, model_b);
        }
    }

    NoiseSpec noise_c;
    noise_c.tau_c = kP.tau_c;
    noise_c.var_de_rel = 1.0;
    HOMSetup setup_c;
    setup_c.delay = kP.hom_delay;
    setup_c.gamma_l = 1.0 / kP.hom_tl;
    put("fig6c_visibility.csv", visibility(par_q1, perp_q1, warnings), noise_c,
        setup_c, weak_limit_bunching(noise_c));
    return files;
}

struct CtwPoint {
    double ctw = 0.0;
    double tail = 0.0;
};

CtwPoint ctw_for(const HomRefs& refs, double rabi_unused, double tl, double q_inv2,
                 const std::vector<double>& out_grid,
                 std::vector<std::string>* warnings) {
    (void)rabi_unused;
    NoiseSpec noise;
    noise.tau_c = kP.tau_c;
    noise.var_de_rel = q_inv2;
    const BunchingModel model = weak_limit_bunching(noise);
    HOMSetup setup;
    setup.delay = kP.hom_delay;
    setup.gamma_l = tl == 0.0 ? kInf : 1.0 / tl;
    const double emitter_scale = std::max(kP.sys.t1, kP.sys.t2);

    const CorrelationSeries par = g2x_weak_noisy(refs.g2, refs.g1, setup, noise,
                                                 model, out_grid, emitter_scale,
                                                 warnings);
    setup.pol_angle = std::acos(-1.0) / 2.0;
    const CorrelationSeries perp = g2x_weak_noisy(refs.g2, refs.g1, setup, noise,
                                                  model, out_grid, emitter_scale,
                                                  warnings);
    const CTWResult r =
        ctw(coalescence_profile(par, perp), -0.5 * kP.hom_delay, 0.5 * kP.hom_delay);
    return {r.ctw, r.truncation_residual};
}

std::vector<fs::path> fig7(const fs::path& out_dir, std::vector<std::string>* warnings) {
    const double half_window = 0.5 * kP.hom_delay;
    const double cover = half_window + kP.hom_delay + 1.0;
    const HomRefs refs = hom_references(kP.weak_rabi, cover, kP.ctw_step);
    const std::vector<double> out_grid =
        uniform_grid(-half_window, half_window, kP.ctw_step);

    DrivingField field;
    field.rabi_mean = kP.weak_rabi;
    NoiseSpec meta_noise;
    meta_noise.tau_c = kP.tau_c;
    Header h = run_header(kP.sys, field, meta_noise, 0);
    h.emplace_back("delay_ns", fmt(kP.hom_delay));
    h.emplace_back("window_ns", fmt(half_window));

    std::vector<std::vector<double>> rows;
    for (double tl : kP.ctw_tl_set)
        for (double q2 : kP.ctw_q_inv2_set) {
            const CtwPoint p = ctw_for(refs, kP.weak_rabi, tl, q2, out_grid, warnings);
            rows.push_back({tl, q2, p.ctw, p.ctw / tl, p.tail,
                            tl <= kP.tau_c ? 1.0 : 0.0,
                            tl >= kP.hom_delay ? 1.0 : 0.0});
        }
    const fs::path p = out_dir / "fig7_ctw.csv";
    write_table(p, h,
                {"t_l_ns", "q_inv2", "ctw_ns", "ctw_over_tl", "tail_ns",
                 "blur_coupled", "delay_exceeded"},
                rows);
    return {p};
}

std::vector<fs::path> fig8(const fs::path& out_dir, std::vector<std::string>* warnings) {
    const double half_window = 0.5 * kP.hom_delay;
    const double cover = half_window + kP.hom_delay + 1.0;
    const std::vector<double> out_grid =
        uniform_grid(-half_window, half_window, kP.ctw_step);

    DrivingField field;
    field.rabi_mean = kP.weak_rabi;
    NoiseSpec meta_noise;
    meta_noise.tau_c = kP.tau_c;
    Header h = run_header(kP.sys, field, meta_noise, 0);
    h.emplace_back("delay_ns", fmt(kP.hom_delay));
    h.emplace_back("t_l_ns", fmt(kP.hom_tl));
    h.emplace_back("window_ns", fmt(half_window));

    std::vector<std::vector<double>> rows;
    const double log_lo = std::log(kP.sat_lo), log_hi = std::log(kP.sat_hi);
    for (int i = 0; i < kP.sat_points; ++i) {
        const double s0 =
            std::exp(log_lo + (log_hi - log_lo) * i / (kP.sat_points - 1));
        const double rabi = std::sqrt(s0 / (kP.sys.t1 * kP.sys.t2));
        const HomRefs refs = hom_references(rabi, cover, kP.ctw_step);
        for (double q2 : kP.ctw_q_inv2_set) {
            const CtwPoint p =
                ctw_for(refs, rabi, kP.hom_tl, q2, out_grid, warnings);
            rows.push_back({s0, rabi, q2, p.ctw, p.ctw / kP.hom_tl});
        }
    }
    const fs::path p = out_dir / "fig8_ctw_vs_saturation.csv";
    write_table(p, h, {"s0", "rabi_rad_ns", "q_inv2", "ctw_ns", "ctw_over_tl"},
                rows);
    return {p};
}

}  // namespace

const std::vector<std::string>& known_figures() {
    static const std::vector<std::string> names = {"fig2", "fig3", "fig4",
                                                   "fig6", "fig7", "fig8"};
    return names;
}

std::vector<std::filesystem::path> reproduce_figure(
    const std::string& name, const std::filesystem::path& out_dir, int quad_order,
    ExecPolicy policy, std::vector<std::string>* warnings) {
    fs::create_directories(out_dir);
    if (name == "fig2")
        return correlation_panels("fig2", kP.weak_rabi, kP.weak_sigma, out_dir,
                                  quad_order > 0 ? quad_order : kP.corr_order,
                                  policy);
    if (name == "fig3")
        return fig3(out_dir, quad_order > 0 ? quad_order : kP.bunching_order, policy);
    if (name == "fig4")
        return correlation_panels("fig4", kP.strong_rabi, kP.strong_sigma, out_dir,
                                  quad_order > 0 ? quad_order : kP.corr_order,
                                  policy);
    if (name == "fig6") return fig6(out_dir, warnings);
    if (name == "fig7") return fig7(out_dir, warnings);
    if (name == "fig8") return fig8(out_dir, warnings);
    throw validation_error("unknown figure '" + name + "'");
}

}  // namespace noisycw
