#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "noisycw/common.hpp"

// Embedded Dormand-Prince 5(4) pair with the classic quartic dense-output
// interpolant. Works on any Eigen column vector with real or complex scalar.

namespace noisycw::ode {

struct Options {
    double rtol = 1e-8;
    double atol = 1e-10;
    double h_init = 0.0;
    double h_min = 1e-12;
    long max_steps = 2000000;
};

namespace dp54 {

inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;

inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                        a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// b - b_hat, for the embedded 4th order error estimate
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

// Quartic interpolant coefficients, row i multiplies k_i, columns are
// powers theta^1..theta^4.
inline constexpr double bi[7][4] = {
    {1.0, -183.0 / 64, 37.0 / 12, -145.0 / 128},
    {0.0, 0.0, 0.0, 0.0},
    {0.0, 1500.0 / 371, -1000.0 / 159, 1000.0 / 371},
    {0.0, -125.0 / 32, 125.0 / 12, -375.0 / 64},
    {0.0, 9477.0 / 3392, -729.0 / 106, 25515.0 / 6784},
    {0.0, -11.0 / 7, 11.0 / 3, -55.0 / 28},
    {0.0, 3.0 / 2, -4.0, 5.0 / 2},
};

}  // namespace dp54

// Integrates dy/dt = f(t, y) and returns y at every entry of `times`
// (nondecreasing; times.front() is the initial time, where y0 is returned).
template <class Vec, class F>
std::vector<Vec> integrate_at(F&& f, const Vec& y0, const std::vector<double>& times,
                              const Options& opt = {}) {
    using namespace dp54;
    if (times.empty()) return {};
    for (size_t i = 1; i < times.size(); ++i)
        if (times[i] < times[i - 1])
            throw validation_error("integrate_at: times must be nondecreasing");

    std::vector<Vec> out;
    out.reserve(times.size());
    out.push_back(y0);
    size_t next = 1;
    while (next < times.size() && times[next] <= times.front()) {
        out.push_back(y0);
        ++next;
    }
    if (next >= times.size()) return out;

    const double t_end = times.back();
    double t = times.front();
    Vec y = y0;
    const auto n = y.size();

    Vec k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), yerr(n);
    f(t, y, k1);

    auto sc = [&](Eigen::Index i, const Vec& ya, const Vec& yb) {
        return opt.atol + opt.rtol * std::max(std::abs(ya[i]), std::abs(yb[i]));
    };

    double h = opt.h_init;
    if (h <= 0.0) {
        double d0 = 0.0, d1 = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double s = sc(i, y, y);
            d0 += std::norm(y[i] / s);
            d1 += std::norm(k1[i] / s);
        }
        d0 = std::sqrt(d0 / double(n));
        d1 = std::sqrt(d1 / double(n));
        h = (d1 > 1e-300) ? 0.01 * d0 / d1 : 1e-3;
        h = std::min(h, (t_end - t) / 10.0);
        h = std::max(h, opt.h_min);
    }

    for (long step = 0; step < opt.max_steps; ++step) {
        if (t >= t_end) break;
        h = std::min(h, t_end - t);
        if (h < opt.h_min)
            throw integration_error("adaptive step size underflow", t);

        ytmp = y + h * (a21 * k1);
        f(t + c2 * h, ytmp, k2);
        ytmp = y + h * (a31 * k1 + a32 * k2);
        f(t + c3 * h, ytmp, k3);
        ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        f(t + c4 * h, ytmp, k4);
        ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        f(t + c5 * h, ytmp, k5);
        ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        f(t + h, ytmp, k6);
        ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        f(t + h, ynew, k7);
        yerr = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        double err = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            err += std::norm(yerr[i] / sc(i, y, ynew));
        err = std::sqrt(err / double(n));

        if (err <= 1.0) {
            while (next < times.size() && times[next] <= t + h + 1e-14 * std::abs(t + h)) {
                const double theta = std::clamp((times[next] - t) / h, 0.0, 1.0);
                Vec yi = y;
                const Vec* ks[7] = {&k1, &k2, &k3, &k4, &k5, &k6, &k7};
                for (int j = 0; j < 7; ++j) {
                    const double p = theta * (bi[j][0] +
                                    theta * (bi[j][1] + theta * (bi[j][2] + theta * bi[j][3])));
                    if (p != 0.0) yi += (h * p) * (*ks[j]);
                }
                out.push_back(yi);
                ++next;
            }
            t += h;
            y = ynew;
            k1 = k7;  // first-same-as-last
            if (next >= times.size()) return out;
            const double fac = std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
            h *= fac;
        } else {
            h *= std::clamp(0.9 * std::pow(err, -0.2), 0.2, 1.0);
        }
    }
    if (next < times.size())
        throw integration_error("step budget exhausted before reaching final time", t);
    return out;
}

}  // namespace noisycw::ode
