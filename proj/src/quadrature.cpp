#include "werate/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "werate/errors.hpp"

namespace werate {

Quadrature gauss_legendre(int n, double lo, double hi) {
  if (n < 1) throw ValidationError("quadrature needs at least one node");
  if (!(hi > lo)) throw ValidationError("quadrature interval is empty");
  Quadrature q{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  const double mid = 0.5 * (hi + lo);
  const double half = 0.5 * (hi - lo);
  // Legendre P_n and P_{n-1} at z by the three-term recurrence.
  auto legendre = [n](double z) {
    double p0 = 1.0, p1 = z;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    return std::pair{n == 0 ? 1.0 : p1, p0};
  };
  // Newton from the classical cosine guess; roots are symmetric about 0.
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      const auto [pn, pm] = legendre(z);
      const double dp = n * (z * pn - pm) / (z * z - 1.0);
      const double dz = pn / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    const auto [pn, pm] = legendre(z);
    const double dp = n * (z * pn - pm) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    q.nodes(i) = mid - half * z;
    q.nodes(n - 1 - i) = mid + half * z;
    q.weights(i) = half * w;
    q.weights(n - 1 - i) = half * w;
  }
  return q;
}

Quadrature trapezoid(int intervals, double lo, double hi) {
  if (intervals < 1) throw ValidationError("trapezoid rule needs at least one interval");
  if (!(hi > lo)) throw ValidationError("quadrature interval is empty");
  const double h = (hi - lo) / intervals;
  Quadrature q{Eigen::VectorXd(intervals + 1), Eigen::VectorXd(intervals + 1)};
  for (int j = 0; j <= intervals; ++j) {
    q.nodes(j) = lo + j * h;
    q.weights(j) = h;
  }
  q.weights(0) = q.weights(intervals) = 0.5 * h;
  return q;
}

}  // namespace werate
