#include "noisycw/quadrature.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace noisycw {

QuadratureRule gauss_hermite_normal(int order) {
    if (order < 1 || order > 200)
        throw validation_error("gauss_hermite_normal: order must be in [1, 200]");
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(order, order);
    for (int i = 1; i < order; ++i) {
        const double b = std::sqrt(0.5 * i);
        j(i - 1, i) = b;
        j(i, i - 1) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
    QuadratureRule r;
    r.points.resize(order);
    r.weights.resize(order);
    for (int i = 0; i < order; ++i) {
        // physicists' nodes rescaled for the standard normal weight
        r.points[i] = es.eigenvalues()(i) * std::sqrt(2.0);
        const double v0 = es.eigenvectors()(0, i);
        r.weights[i] = v0 * v0;
    }
    return r;
}

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n)
        throw validation_error("MonotoneCubic: need >= 2 matched points");
    for (std::size_t i = 1; i < n; ++i)
        if (x_[i] <= x_[i - 1])
            throw validation_error("MonotoneCubic: abscissae must increase");

    std::vector<double> h(n - 1), s(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = x_[i + 1] - x_[i];
        s[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    d_.assign(n, 0.0);
    d_[0] = s[0];
    d_[n - 1] = s[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i)
        d_[i] = (s[i - 1] * s[i] <= 0.0) ? 0.0
                                         : 0.5 * (s[i - 1] + s[i]);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (s[i] == 0.0) {
            d_[i] = d_[i + 1] = 0.0;
            continue;
        }
        const double a = d_[i] / s[i], b = d_[i + 1] / s[i];
        const double r2 = a * a + b * b;
        if (r2 > 9.0) {
            const double t = 3.0 / std::sqrt(r2);
            d_[i] = t * a * s[i];
            d_[i + 1] = t * b * s[i];
        }
    }
}

double MonotoneCubic::operator()(double xq) const {
    if (xq <= x_.front()) return y_.front();
    if (xq >= x_.back()) return y_.back();
    const auto it = std::upper_bound(x_.begin(), x_.end(), xq);
    const std::size_t i = std::size_t(it - x_.begin()) - 1;
    const double h = x_[i + 1] - x_[i];
    const double t = (xq - x_[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
    return h00 * y_[i] + h10 * h * d_[i] + h01 * y_[i + 1] + h11 * h * d_[i + 1];
}

}  // namespace noisycw
