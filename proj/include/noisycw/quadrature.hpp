#pragma once

#include <vector>

#include "noisycw/common.hpp"

namespace noisycw {

// Nodes and weights for E[f(Z)], Z ~ N(0,1); weights sum to one.
struct QuadratureRule {
    std::vector<double> points;
    std::vector<double> weights;
};

QuadratureRule gauss_hermite_normal(int order);

// Fritsch-Carlson shape-preserving cubic through strictly increasing x.
// Evaluation clamps to the end values outside the data range.
class MonotoneCubic {
  public:
    MonotoneCubic(std::vector<double> x, std::vector<double> y);
    double operator()(double xq) const;

  private:
    std::vector<double> x_, y_, d_;  // d_ = endpoint derivatives
};

}  // namespace noisycw
