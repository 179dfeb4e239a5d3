#pragma once

#include <vector>

namespace kolmo {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule with `count` nodes on [a, b].
QuadratureRule gauss_legendre(int count, double a = -1.0, double b = 1.0);

/// Composite Gauss-Legendre on [a, b]: one `count`-node panel between consecutive cuts.
/// Cuts outside (a, b) are ignored.
QuadratureRule composite_gauss_legendre(int count, double a, double b, std::vector<double> cuts);

}  // namespace kolmo
