#include "noisycw/hom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "noisycw/quadrature.hpp"

namespace noisycw {

void HOMSetup::validate() const {
    if (!(r_int >= 0.0) || !(t_int > 0.0) || std::abs(r_int + t_int - 1.0) > 1e-12)
        throw validation_error("HOMSetup: need lossless splitters, R + T = 1");
    if (!(delay > 0.0)) throw validation_error("HOMSetup: delay must be positive");
    if (gamma_l < 0.0) throw validation_error("HOMSetup: gamma_l must be >= 0");
    if (irf_fwhm < 0.0) throw validation_error("HOMSetup: irf_fwhm must be >= 0");
}

WeightTable hom_weights(cplx ta, cplx tb, cplx ra, cplx rb, double phi) {
    if (std::abs(std::norm(ta) + std::norm(ra) - 1.0) > 1e-12 ||
        std::abs(std::norm(tb) + std::norm(rb) - 1.0) > 1e-12)
        throw validation_error("hom_weights: splitter amplitudes must be unitary");

    const double Ta = std::norm(ta), Ra = std::norm(ra);
    const double Tb = std::norm(tb), Rb = std::norm(rb);
    const double c = std::cos(phi), c2 = c * c;
    const cplx cta = std::conj(ta), ctb = std::conj(tb);
    const cplx cra = std::conj(ra), crb = std::conj(rb);

    WeightTable t;
    auto put = [&](int idx, cplx v) { t.weights[idx] = v; };
    put(0b0000, Ta * Ta * Tb * Rb);
    put(0b0001, -Ta * Rb * ta * tb * cra * crb * c);
    put(0b0010, Ta * Tb * cta * tb * ra * crb * c);
    put(0b0011, -Tb * Rb * cta * cta * ra * ra * c2);
    put(0b0100, Ta * Tb * ta * ctb * cra * rb * c);
    put(0b0101, -Ta * Ra * ctb * ctb * rb * rb * c2);
    put(0b0110, Ta * Tb * Tb * Ra);
    put(0b0111, -Tb * Ra * cta * ctb * ra * rb * c);
    put(0b1000, -Ta * Rb * cta * ctb * ra * rb * c);
    put(0b1001, Ta * Ra * Rb * Rb);
    put(0b1010, -Ta * Ra * tb * tb * crb * crb * c2);
    put(0b1011, Ra * Rb * cta * tb * ra * crb * c);
    put(0b1100, -Tb * Rb * ta * ta * cra * cra * c2);
    put(0b1101, Ra * Rb * ta * ctb * cra * rb * c);
    put(0b1110, -Tb * Ra * ta * tb * cra * crb * c);
    put(0b1111, Tb * Ra * Ra * Rb);
    return t;
}

cplx table2_factor(int term, cplx ta, cplx tb, cplx ra, cplx rb, double phi) {
    const WeightTable w = hom_weights(ta, tb, ra, rb, phi);
    switch (term) {
        case 1: return w.weights.at(0b0000) + w.weights.at(0b1111);
        case 2: return w.weights.at(0b0110);
        case 3: return w.weights.at(0b1001);
        case 4: return w.weights.at(0b0010);
        case 5: return w.weights.at(0b1101);
        case 6: return w.weights.at(0b1110);
        case 7: return w.weights.at(0b0011);
        case 8: return w.weights.at(0b0101);
        case 9: return w.weights.at(0b1000);
        default: throw validation_error("table2_factor: term must be 1..9");
    }
}

double table2_envelope(int term, double tau, double delta_t, double gamma_l) {
    const double at = std::abs(tau), ad = std::abs(delta_t);
    const bool blurred = std::isinf(gamma_l);
    switch (term) {
        case 1:
        case 2:
        case 3: return 1.0;
        case 4:
        case 5:
        case 6:
        case 9: return blurred ? 0.0 : std::exp(-gamma_l * ad);
        case 7:
            if (blurred) return 0.0;
            return at < ad ? std::exp(-gamma_l * (ad + at))
                           : std::exp(-2.0 * gamma_l * ad);
        case 8: return blurred ? 0.0 : std::exp(-2.0 * gamma_l * at);
        default: throw validation_error("table2_envelope: term must be 1..9");
    }
}

namespace {

void check_assembly_inputs(const CorrelationSeries& g2, const CorrelationSeries& g1,
                           const HOMSetup& setup, double emitter_scale,
                           std::vector<std::string>* warnings) {
    setup.validate();
    g2.validate();
    g1.validate();
    if (!g2.normalized || !g1.normalized)
        throw validation_error("g2x assembly: inputs must be normalized series");
    if (g2.kind != SeriesKind::g2)
        throw validation_error("g2x assembly: first input must be a g2 series");
    if (g1.kind != SeriesKind::g1_rotating)
        throw validation_error(
            "g2x assembly: coherence input must be a rotating-frame g1 series");
    if (warnings) {
        if (!std::isinf(setup.gamma_l) && setup.gamma_l * setup.delay < 3.0)
            warnings->push_back(
                "gamma_l * delay < 3: one-photon interference terms are not "
                "negligible, assembled response is incomplete");
        if (emitter_scale > 0.0 && setup.delay < 5.0 * emitter_scale)
            warnings->push_back(
                "delay below 5x the emitter time scale: echo features overlap "
                "the zero-delay dip");
    }
}

std::vector<double> assembly_grid(const CorrelationSeries& g2,
                                  const CorrelationSeries& g1, const HOMSetup& setup,
                                  const std::vector<double>& requested) {
    if (!requested.empty()) {
        for (size_t i = 1; i < requested.size(); ++i)
            if (requested[i] <= requested[i - 1])
                throw validation_error("g2x assembly: output delays must increase");
        for (double tau : requested)
            if (!g2.covers(tau) || !g2.covers(tau - setup.delay) ||
                !g2.covers(tau + setup.delay) || !g1.covers(tau))
                throw coverage_error("g2x assembly: inputs do not cover the requested "
                                     "delays and their echo shifts");
        return requested;
    }
    std::vector<double> grid;
    for (double tau : g2.delays)
        if (g2.covers(tau - setup.delay) && g2.covers(tau + setup.delay) && g1.covers(tau))
            grid.push_back(tau);
    if (grid.empty())
        throw coverage_error(
            "g2x assembly: g2 grid does not extend one arm delay past any output point");
    return grid;
}

double blur2(double gamma_l, double tau) {
    if (std::isinf(gamma_l)) return 0.0;
    return std::exp(-2.0 * gamma_l * std::abs(tau));
}

}  // namespace

CorrelationSeries g2x_bpp(const CorrelationSeries& g2, const CorrelationSeries& g1_rot,
                          const HOMSetup& setup, const std::vector<double>& out_delays,
                          double emitter_scale, std::vector<std::string>* warnings) {
    check_assembly_inputs(g2, g1_rot, setup, emitter_scale, warnings);
    const std::vector<double> grid = assembly_grid(g2, g1_rot, setup, out_delays);

    const double R = setup.r_int, T = setup.t_int;
    const double rr_tt = R * R + T * T;
    const double c2 = std::cos(setup.pol_angle) * std::cos(setup.pol_angle);

    CorrelationSeries out;
    out.delays = grid;
    out.values.reserve(grid.size());
    out.kind = c2 < 1e-12 ? SeriesKind::g2x_perp : SeriesKind::g2x_par;
    out.normalized = true;
    for (double tau : grid) {
        const double intensity_terms = rr_tt * g2.value_at(tau).real() +
                                       T * T * g2.value_at(tau - setup.delay).real() +
                                       R * R * g2.value_at(tau + setup.delay).real();
        const double interference = 2.0 * R * T * c2 * blur2(setup.gamma_l, tau) *
                                    std::norm(g1_rot.value_at(tau));
        out.values.push_back((intensity_terms - interference) / (2.0 * rr_tt));
    }
    return out;
}

CorrelationSeries g2x_weak_noisy(const CorrelationSeries& g2_ref,
                                 const CorrelationSeries& g1_ref, const HOMSetup& setup,
                                 const NoiseSpec& noise, const BunchingModel& model,
                                 const std::vector<double>& out_delays,
                                 double emitter_scale, std::vector<std::string>* warnings) {
    check_assembly_inputs(g2_ref, g1_ref, setup, emitter_scale, warnings);
    noise.validate();
    const std::vector<double> grid = assembly_grid(g2_ref, g1_ref, setup, out_delays);

    const double a = setup.alpha();
    const double a2 = a * a;
    const double q2 = noise.q_inv2();
    const double tc = noise.tau_c;
    const double dt = setup.delay;
    const double c2 = std::cos(setup.pol_angle) * std::cos(setup.pol_angle);

    auto w2 = [&](double x) {
        const double e = std::exp(-std::abs(x) / tc);
        return 0.5 * (1.0 + model.a * e + model.b * e * e);
    };
    auto w1 = [&](double tau) {
        const double ed = std::exp(-dt / tc);
        const double et = std::exp(-std::abs(tau) / tc);
        const double bracket = (1.0 + q2 * et) * (1.0 + q2 * et) +
                               2.0 * q2 * ed * (1.0 + 2.0 * q2 * ed) +
                               q2 * (std::exp(-std::abs(dt + tau) / tc) +
                                     std::exp(-std::abs(dt - tau) / tc));
        return a * blur2(setup.gamma_l, tau) / (1.0 + a2) * bracket /
               ((1.0 + q2) * (1.0 + q2));
    };

    CorrelationSeries out;
    out.delays = grid;
    out.values.reserve(grid.size());
    out.kind = c2 < 1e-12 ? SeriesKind::g2x_perp : SeriesKind::g2x_par;
    out.normalized = true;
    for (double tau : grid) {
        const double shifted = (a2 * w2(tau - dt) * g2_ref.value_at(tau - dt).real() +
                                w2(tau + dt) * g2_ref.value_at(tau + dt).real()) /
                               (a2 + 1.0);
        const double v = w2(tau) * g2_ref.value_at(tau).real() + shifted -
                         c2 * w1(tau) * std::norm(g1_ref.value_at(tau));
        out.values.push_back(v);
    }
    return out;
}

CorrelationSeries visibility(const CorrelationSeries& g2x_par,
                             const CorrelationSeries& g2x_perp,
                             std::vector<std::string>* warnings) {
    g2x_par.validate();
    g2x_perp.validate();
    if (g2x_par.size() != g2x_perp.size())
        throw validation_error("visibility: inputs must share a delay grid");
    for (size_t i = 0; i < g2x_par.size(); ++i)
        if (std::abs(g2x_par.delays[i] - g2x_perp.delays[i]) > 1e-12)
            throw validation_error("visibility: inputs must share a delay grid");

    CorrelationSeries out;
    out.delays = g2x_par.delays;
    out.values.reserve(out.delays.size());
    out.kind = SeriesKind::visibility;
    out.normalized = true;
    size_t floored = 0;
    for (size_t i = 0; i < g2x_par.size(); ++i) {
        const double perp = g2x_perp.values[i].real();
        if (perp < 1e-9) {
            out.values.push_back(0.0);
            ++floored;
            continue;
        }
        out.values.push_back(std::abs(g2x_par.values[i].real() - perp) / perp);
    }
    if (floored > 0 && warnings)
        warnings->push_back("visibility: " + std::to_string(floored) +
                            " points had a vanishing reference and were zeroed");
    return out;
}

CorrelationSeries coalescence_profile(const CorrelationSeries& g2x_par,
                                      const CorrelationSeries& g2x_perp) {
    g2x_par.validate();
    g2x_perp.validate();
    if (g2x_par.size() != g2x_perp.size())
        throw validation_error("coalescence_profile: inputs must share a delay grid");
    for (size_t i = 0; i < g2x_par.size(); ++i)
        if (std::abs(g2x_par.delays[i] - g2x_perp.delays[i]) > 1e-12)
            throw validation_error("coalescence_profile: inputs must share a delay grid");

    const double ref0 = g2x_perp.value_at(0.0).real();
    if (!(ref0 > 1e-12))
        throw undefined_normalization_error(
            "coalescence_profile: crossed response vanishes at zero delay");

    CorrelationSeries out;
    out.delays = g2x_par.delays;
    out.values.reserve(out.delays.size());
    out.kind = SeriesKind::visibility;
    out.normalized = true;
    for (size_t i = 0; i < g2x_par.size(); ++i)
        out.values.push_back(
            (g2x_perp.values[i].real() - g2x_par.values[i].real()) / ref0);
    return out;
}

namespace {

double interp_real(const CorrelationSeries& v, double tau) {
    return v.value_at(tau).real();
}

// one-sided tail mass from an exponential fit to the trailing decade
double tail_estimate(const CorrelationSeries& v, double edge, int dir) {
    const double v_edge = std::abs(interp_real(v, edge));
    if (v_edge < 1e-15) return 0.0;

    std::vector<double> ts, logs;
    for (size_t i = 0; i < v.size(); ++i) {
        const double t = v.delays[i];
        if (dir > 0 ? t > edge : t < edge) continue;
        // keep the fit on the edge's side, the mirror flank has opposite slope
        if (t * edge < 0.0) continue;
        const double val = std::abs(v.values[i].real());
        if (val < v_edge || val > 10.0 * v_edge) continue;
        ts.push_back(t);
        logs.push_back(std::log(std::max(val, 1e-300)));
    }
    if (ts.size() < 3) return v_edge * std::abs(v.max_delay() - v.min_delay());

    double st = 0, sl = 0, stt = 0, stl = 0;
    for (size_t i = 0; i < ts.size(); ++i) {
        st += ts[i];
        sl += logs[i];
        stt += ts[i] * ts[i];
        stl += ts[i] * logs[i];
    }
    const double n = double(ts.size());
    const double denom = n * stt - st * st;
    if (std::abs(denom) < 1e-30) return v_edge * std::abs(v.max_delay() - v.min_delay());
    const double slope = (n * stl - st * sl) / denom;
    const double lambda = dir > 0 ? -slope : slope;  // decay rate away from zero
    if (lambda < 1e-9) return v_edge * std::abs(v.max_delay() - v.min_delay());
    return v_edge / lambda;
}

}  // namespace

CTWResult ctw(const CorrelationSeries& v, double window_lo, double window_hi) {
    v.validate();
    if (v.kind != SeriesKind::visibility)
        throw validation_error("ctw: input must be a visibility series");
    if (!(window_lo < window_hi)) throw validation_error("ctw: empty window");
    if (!v.covers(window_lo) || !v.covers(window_hi))
        throw coverage_error("ctw: window exceeds the visibility grid");

    double integral = 0.0;
    double prev_t = window_lo;
    double prev_v = std::abs(interp_real(v, window_lo));
    for (size_t i = 0; i < v.size(); ++i) {
        const double t = v.delays[i];
        if (t <= window_lo || t >= window_hi) continue;
        const double val = std::abs(v.values[i].real());
        integral += 0.5 * (prev_v + val) * (t - prev_t);
        prev_t = t;
        prev_v = val;
    }
    integral += 0.5 * (prev_v + std::abs(interp_real(v, window_hi))) * (window_hi - prev_t);

    CTWResult r;
    r.ctw = integral;
    r.window_lo = window_lo;
    r.window_hi = window_hi;
    r.truncation_residual =
        tail_estimate(v, window_lo, -1) + tail_estimate(v, window_hi, +1);
    return r;
}

CTWResult ctw(const CorrelationSeries& v, const HOMSetup& setup) {
    setup.validate();
    return ctw(v, -0.5 * setup.delay, 0.5 * setup.delay);
}

CorrelationSeries convolve_irf(const CorrelationSeries& series, double fwhm) {
    series.validate();
    if (fwhm < 0.0) throw validation_error("convolve_irf: fwhm must be >= 0");
    if (fwhm == 0.0) return series;

    const bool uniform = series.is_uniform();
    CorrelationSeries work = series;
    if (!uniform) {
        double step = std::numeric_limits<double>::infinity();
        for (size_t i = 1; i < series.size(); ++i)
            step = std::min(step, series.delays[i] - series.delays[i - 1]);
        std::vector<double> re(series.size()), im(series.size());
        for (size_t i = 0; i < series.size(); ++i) {
            re[i] = series.values[i].real();
            im[i] = series.values[i].imag();
        }
        const MonotoneCubic fr(series.delays, re), fi(series.delays, im);
        work.delays = uniform_grid(series.min_delay(), series.max_delay(), step);
        work.values.clear();
        work.stderrs.clear();
        for (double t : work.delays) work.values.emplace_back(fr(t), fi(t));
    }

    const double h = work.delays[1] - work.delays[0];
    const double sigma = fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
    const long half = std::max(1L, std::lround(std::ceil(4.0 * sigma / h)));
    std::vector<double> kernel(size_t(2 * half + 1));
    double ksum = 0.0;
    for (long j = -half; j <= half; ++j) {
        const double x = double(j) * h;
        kernel[size_t(j + half)] = std::exp(-0.5 * x * x / (sigma * sigma));
        ksum += kernel[size_t(j + half)];
    }
    for (double& k : kernel) k /= ksum;

    std::vector<cplx> smoothed(work.size(), cplx(0.0));
    const long n = long(work.size());
    for (long i = 0; i < n; ++i) {
        cplx acc = 0.0;
        for (long j = -half; j <= half; ++j) {
            const long src = i + j;
            if (src < 0 || src >= n) continue;
            acc += kernel[size_t(j + half)] * work.values[size_t(src)];
        }
        smoothed[size_t(i)] = acc;
    }
    work.values = std::move(smoothed);
    work.stderrs.clear();

    if (!uniform) {
        std::vector<double> re(work.size()), im(work.size());
        for (size_t i = 0; i < work.size(); ++i) {
            re[i] = work.values[i].real();
            im[i] = work.values[i].imag();
        }
        const MonotoneCubic fr(work.delays, re), fi(work.delays, im);
        CorrelationSeries out = series;
        out.stderrs.clear();
        for (size_t i = 0; i < out.size(); ++i)
            out.values[i] = cplx(fr(out.delays[i]), fi(out.delays[i]));
        return out;
    }
    return work;
}

}  // namespace noisycw
