#pragma once

#include <Eigen/Dense>

namespace werate {

/// Nodes and weights of a one-dimensional quadrature rule.
struct Quadrature {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
  int size() const { return static_cast<int>(nodes.size()); }
};

/// Gauss-Legendre rule with `n` nodes mapped to [lo, hi].
Quadrature gauss_legendre(int n, double lo, double hi);

/// Composite trapezoid rule on `intervals` equal sub-intervals of [lo, hi]
/// (intervals + 1 nodes, endpoints included).
Quadrature trapezoid(int intervals, double lo, double hi);

}  // namespace werate
