#include "noisycw/averaging.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unsupported/Eigen/MatrixFunctions>

#include "noisycw/quadrature.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace noisycw {

namespace {

struct Chol2 {
    double l11, l21, l22;  // (dw, de) = (l11 za, l21 za + l22 zb)
};

Chol2 stationary_chol(const NoiseSpec& noise) {
    const double vw = noise.var_domega, ve = noise.var_de_rel;
    const double c = noise.epsilon * std::sqrt(vw * ve);
    Chol2 ch;
    ch.l11 = std::sqrt(vw);
    ch.l21 = ch.l11 > 0.0 ? c / ch.l11 : 0.0;
    ch.l22 = std::sqrt(std::max(ve - ch.l21 * ch.l21, 0.0));
    return ch;
}

}  // namespace

cplx pseudo_adiabatic_average(const PairKernel& kernel, const NoiseSpec& noise,
                              double tau, int order, ExecPolicy policy) {
    noise.validate();
    if (tau < 0.0) throw validation_error("pseudo_adiabatic_average: tau must be >= 0");
    const QuadratureRule rule = gauss_hermite_normal(order);
    const Chol2 ch = stationary_chol(noise);
    const double a = std::exp(-tau / noise.tau_c);
    const double s = std::sqrt(-std::expm1(-2.0 * tau / noise.tau_c));

    const int n = order;
    const int n_outer = n * n;
    std::vector<cplx> partial(n_outer);

    auto outer_body = [&](int k) {
        const int ia = k / n, ib = k % n;
        const double za = rule.points[ia], zb = rule.points[ib];
        const double dw1 = ch.l11 * za;
        const double de1 = ch.l21 * za + ch.l22 * zb;
        cplx acc = 0.0;
        for (int ja = 0; ja < n; ++ja) {
            const double dw2 = a * dw1 + s * ch.l11 * rule.points[ja];
            const double base_de = a * de1 + s * ch.l21 * rule.points[ja];
            for (int jb = 0; jb < n; ++jb) {
                const double de2 = base_de + s * ch.l22 * rule.points[jb];
                acc += rule.weights[ja] * rule.weights[jb] *
                       kernel(dw1, de1, dw2, de2, tau);
            }
        }
        partial[size_t(k)] = rule.weights[ia] * rule.weights[ib] * acc;
    };

    if (policy == ExecPolicy::parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (int k = 0; k < n_outer; ++k) outer_body(k);
    } else {
        for (int k = 0; k < n_outer; ++k) outer_body(k);
    }

    cplx sum = 0.0;
    for (const cplx& p : partial) sum += p;
    return sum;
}

namespace {

enum class AvgKind { g1, g2 };

CorrelationSeries averaged_series(AvgKind which, const TwoLevelSystem& sys,
                                  const DrivingField& field, const NoiseSpec& noise,
                                  const std::vector<double>& tau_grid, int order,
                                  ExecPolicy policy) {
    sys.validate();
    field.validate();
    noise.validate();
    if (tau_grid.empty()) throw validation_error("averaged series: empty grid");
    if (tau_grid.front() < 0.0)
        throw validation_error("averaged series: delays must be nonnegative");
    for (size_t i = 1; i < tau_grid.size(); ++i)
        if (tau_grid[i] <= tau_grid[i - 1])
            throw validation_error("averaged series: grid must increase");

    const QuadratureRule rule = gauss_hermite_normal(order);
    const Chol2 ch = stationary_chol(noise);
    const LiouvillianFamily parts = liouvillian_family(sys, field);
    const int n = order;
    const int n_outer = n * n;

    // preparation-time nodes: steady states and correlator seeds
    std::vector<StateVec> seed(n_outer);
    std::vector<double> w1(n_outer), dw1s(n_outer), de1s(n_outer);
    double mean_intensity = 0.0;
    for (int k = 0; k < n_outer; ++k) {
        const int ia = k / n, ib = k % n;
        const double za = rule.points[ia], zb = rule.points[ib];
        dw1s[k] = ch.l11 * za;
        de1s[k] = ch.l21 * za + ch.l22 * zb;
        w1[k] = rule.weights[ia] * rule.weights[ib];
        const OperatorMatrix rho = steady_state(parts.at(dw1s[k], de1s[k]));
        seed[k] = which == AvgKind::g1 ? vectorize(s_minus() * rho)
                                       : vectorize(s_minus() * rho * s_plus());
        mean_intensity += w1[k] * rho(1, 1).real();
    }
    if (mean_intensity < 1e-14)
        throw undefined_normalization_error("averaged series: mean intensity vanishes");

    const int readout = which == AvgKind::g1 ? 2 : 3;
    const double norm = which == AvgKind::g1 ? mean_intensity
                                             : mean_intensity * mean_intensity;

    CorrelationSeries out;
    out.delays = tau_grid;
    out.values.resize(tau_grid.size());
    out.kind = which == AvgKind::g1 ? SeriesKind::g1_rotating : SeriesKind::g2;
    out.normalized = true;

    std::vector<cplx> partial(n_outer);
    for (size_t it = 0; it < tau_grid.size(); ++it) {
        const double tau = tau_grid[it];
        const double a = std::exp(-tau / noise.tau_c);
        const double s = std::sqrt(-std::expm1(-2.0 * tau / noise.tau_c));

        auto outer_body = [&](int k) {
            cplx acc = 0.0;
            for (int ja = 0; ja < n; ++ja) {
                const double dw2 = a * dw1s[k] + s * ch.l11 * rule.points[ja];
                const double de_a = a * de1s[k] + s * ch.l21 * rule.points[ja];
                for (int jb = 0; jb < n; ++jb) {
                    const double de2 = de_a + s * ch.l22 * rule.points[jb];
                    const LiouvMatrix prop =
                        (parts.at(dw2, de2) * tau).exp();
                    const StateVec v = prop * seed[k];
                    acc += rule.weights[ja] * rule.weights[jb] * v(readout);
                }
            }
            partial[size_t(k)] = w1[k] * acc;
        };

        if (policy == ExecPolicy::parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
            for (int k = 0; k < n_outer; ++k) outer_body(k);
        } else {
            for (int k = 0; k < n_outer; ++k) outer_body(k);
        }

        cplx sum = 0.0;
        for (const cplx& p : partial) sum += p;
        out.values[it] = sum / norm;
    }
    return out;
}

}  // namespace

CorrelationSeries averaged_g1_series(const TwoLevelSystem& sys, const DrivingField& field,
                                     const NoiseSpec& noise,
                                     const std::vector<double>& tau_grid, int order,
                                     ExecPolicy policy) {
    return averaged_series(AvgKind::g1, sys, field, noise, tau_grid, order, policy);
}

CorrelationSeries averaged_g2_series(const TwoLevelSystem& sys, const DrivingField& field,
                                     const NoiseSpec& noise,
                                     const std::vector<double>& tau_grid, int order,
                                     ExecPolicy policy) {
    return averaged_series(AvgKind::g2, sys, field, noise, tau_grid, order, policy);
}

cplx frozen_average(const std::function<cplx(double, double)>& correlator,
                    const NoiseSpec& noise, FrozenMode mode, int order) {
    noise.validate();
    if (mode == FrozenMode::two_point) {
        const double ve = noise.var_de_rel;
        const double e_scale = std::sqrt(1.0 + ve);
        const double dw_rms = std::sqrt(noise.var_domega);
        const double c = noise.epsilon * std::sqrt(ve) / std::sqrt(1.0 + ve);
        return 0.5 * (1.0 + c) * correlator(e_scale, dw_rms) +
               0.5 * (1.0 - c) * correlator(e_scale, -dw_rms);
    }
    const QuadratureRule rule = gauss_hermite_normal(order);
    const Chol2 ch = stationary_chol(noise);
    cplx sum = 0.0;
    for (int i = 0; i < order; ++i)
        for (int j = 0; j < order; ++j) {
            const double dw = ch.l11 * rule.points[i];
            const double de = ch.l21 * rule.points[i] + ch.l22 * rule.points[j];
            sum += rule.weights[i] * rule.weights[j] * correlator(1.0 + de, dw);
        }
    return sum;
}

double weak_g1_multiplier(const NoiseSpec& noise, double tau) {
    noise.validate();
    const double q2 = noise.q_inv2();
    const double decay = -std::expm1(-std::abs(tau) / noise.tau_c);  // 1 - e^{-|tau|/tc}
    return 1.0 - q2 * decay / (1.0 + q2);
}

CorrelationSeries weak_g1_average(const CorrelationSeries& g1_ref, const NoiseSpec& noise) {
    g1_ref.validate();
    CorrelationSeries s = g1_ref;
    for (size_t i = 0; i < s.size(); ++i)
        s.values[i] *= weak_g1_multiplier(noise, s.delays[i]);
    return s;
}

double weak_g2_multiplier(const BunchingModel& model, const NoiseSpec& noise, double tau) {
    const double x = std::exp(-std::abs(tau) / noise.tau_c);
    return 1.0 + model.a * x + model.b * x * x;
}

CorrelationSeries weak_g2_average(const CorrelationSeries& g2_ref, const BunchingModel& model,
                                  const NoiseSpec& noise) {
    g2_ref.validate();
    CorrelationSeries s = g2_ref;
    for (size_t i = 0; i < s.size(); ++i)
        s.values[i] *= weak_g2_multiplier(model, noise, s.delays[i]);
    return s;
}

BunchingModel weak_limit_bunching(const NoiseSpec& noise) {
    noise.validate();
    const double q2 = noise.q_inv2();
    const double d = (1.0 + q2) * (1.0 + q2);
    BunchingModel m;
    m.a = 4.0 * q2 / d;
    m.b = 2.0 * q2 * q2 / d;
    return m;
}

BunchingModel fit_bunching(const CorrelationSeries& averaged,
                           const CorrelationSeries& reference, double tau_c,
                           double ref_floor) {
    averaged.validate();
    reference.validate();
    if (!(tau_c > 0.0)) throw validation_error("fit_bunching: tau_c must be positive");
    if (averaged.size() != reference.size())
        throw validation_error("fit_bunching: series must share a grid");
    for (size_t i = 0; i < averaged.size(); ++i)
        if (std::abs(averaged.delays[i] - reference.delays[i]) > 1e-12)
            throw validation_error("fit_bunching: series must share a grid");

    double s11 = 0, s12 = 0, s22 = 0, r1 = 0, r2 = 0;
    std::vector<std::pair<double, double>> pts;  // (x, y)
    for (size_t i = 0; i < averaged.size(); ++i) {
        const double ref = reference.values[i].real();
        if (std::abs(ref) < ref_floor) continue;
        const double x = std::exp(-std::abs(averaged.delays[i]) / tau_c);
        const double y = averaged.values[i].real() / ref - 1.0;
        pts.emplace_back(x, y);
        const double x2 = x * x;
        s11 += x2;
        s12 += x2 * x;
        s22 += x2 * x2;
        r1 += x * y;
        r2 += x2 * y;
    }
    BunchingModel m;
    const double det = s11 * s22 - s12 * s12;
    if (pts.size() < 4 || std::abs(det) < 1e-14) {
        m.poor_fit = true;
        return m;
    }
    m.a = (s22 * r1 - s12 * r2) / det;
    m.b = (s11 * r2 - s12 * r1) / det;
    double ss = 0.0;
    for (const auto& [x, y] : pts) {
        const double e = y - (m.a * x + m.b * x * x);
        ss += e * e;
    }
    m.residual_rms = std::sqrt(ss / double(pts.size()));
    m.poor_fit = m.residual_rms > 0.05;
    return m;
}

BunchingTable BunchingTable::compute(const TwoLevelSystem& sys, const DrivingField& field,
                                     const NoiseSpec& noise_template,
                                     const std::vector<double>& q_grid, int order,
                                     ExecPolicy policy) {
    sys.validate();
    field.validate();
    if (q_grid.empty()) throw validation_error("BunchingTable: empty q grid");

    const double tc = noise_template.tau_c;
    const std::vector<double> grid = uniform_grid(0.0, 5.0 * tc, tc / 12.0);

    BunchingTable table;
    const CorrelationSeries ref = g2_rotating(sys, field, grid);
    for (double q : q_grid) {
        if (!(q > 0.0)) throw validation_error("BunchingTable: Q values must be positive");
        NoiseSpec ns = noise_template;
        ns.var_de_rel = 1.0 / (q * q);
        // amplitude and frequency noise tied the same way the driving laser
        // couples them: rms(domega) = rabi/Q
        ns.var_domega = (field.rabi_mean / q) * (field.rabi_mean / q);
        const CorrelationSeries avg = averaged_g2_series(sys, field, ns, grid, order, policy);
        const BunchingModel m = fit_bunching(avg, ref, tc, 1e-9);
        table.rows_.push_back({1.0 / q, m.a, m.b, m.residual_rms});
    }
    std::sort(table.rows_.begin(), table.rows_.end(),
              [](const Row& a, const Row& b) { return a.q_inv < b.q_inv; });

    auto put = [&](const std::string& k, double v) {
        std::ostringstream os;
        os.precision(17);
        os << v;
        table.meta_[k] = os.str();
    };
    put("tau_c_ns", tc);
    put("t1_ns", sys.t1);
    put("t2_ns", sys.t2);
    put("rabi_mean_rad_ns", field.rabi_mean);
    put("detuning_rad_ns", field.detuning);
    put("epsilon", noise_template.epsilon);
    table.meta_["quad_order"] = std::to_string(order);
    return table;
}

void BunchingTable::save(const std::filesystem::path& file) const {
    const std::filesystem::path tmp = file.string() + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw std::runtime_error("cannot open " + tmp.string());
        out << "# noisycw bunching table v1\n";
        for (const auto& [k, v] : meta_) out << "# " << k << "=" << v << "\n";
        out << "# columns: q_inv,a,b,residual_rms\n";
        char buf[160];
        for (const Row& r : rows_) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", r.q_inv, r.a, r.b,
                          r.residual_rms);
            out << buf;
        }
    }
    std::filesystem::rename(tmp, file);
}

BunchingTable BunchingTable::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open " + file.string());
    BunchingTable table;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string body = line.substr(line.find_first_not_of("# "));
            const auto eq = body.find('=');
            if (eq != std::string::npos)
                table.meta_[body.substr(0, eq)] = body.substr(eq + 1);
            continue;
        }
        std::istringstream ss(line);
        std::string tok;
        std::vector<double> cols;
        while (std::getline(ss, tok, ',')) cols.push_back(std::stod(tok));
        if (cols.size() != 4)
            throw validation_error("BunchingTable::load: expected 4 columns");
        table.rows_.push_back({cols[0], cols[1], cols[2], cols[3]});
    }
    std::sort(table.rows_.begin(), table.rows_.end(),
              [](const Row& a, const Row& b) { return a.q_inv < b.q_inv; });
    if (table.rows_.empty()) throw validation_error("BunchingTable::load: no rows");
    return table;
}

BunchingModel BunchingTable::lookup(double q_inv) const {
    if (rows_.empty()) throw validation_error("BunchingTable::lookup: empty table");
    if (q_inv < 0.0) throw validation_error("BunchingTable::lookup: q_inv must be >= 0");
    std::vector<double> x = {0.0}, ya = {0.0}, yb = {0.0};
    for (const Row& r : rows_) {
        x.push_back(r.q_inv);
        ya.push_back(r.a);
        yb.push_back(r.b);
    }
    const MonotoneCubic fa(x, ya), fb(x, yb);
    BunchingModel m;
    m.a = fa(q_inv);
    m.b = fb(q_inv);
    return m;
}

}  // namespace noisycw
