#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "werate/markov_engine.hpp"
#include "werate/quadrature.hpp"

namespace werate {

/// Weighted transfer kernel W(u, v) = phi(u) p(v | u) sampled at nodes, with
/// node weights (1 for counting measure, quadrature weights otherwise).
///
/// Right action: (W f)(u) = sum_v W(u, v) f(v) w_v.
/// Left action:  (g W^T)(v) = sum_u g(u) W(u, v) w_u.
/// Pairing:      <g, f> = sum_u g(u) f(u) w_u.
struct KernelOperator {
  Vector nodes;
  Vector weights;
  Matrix W;
  /// Node values of phi and p(v|u); empty when the kernel was given directly.
  Vector phi;
  Matrix transition;

  int size() const { return static_cast<int>(W.rows()); }
  bool has_factors() const { return transition.size() > 0; }

  Vector apply(const Vector& f) const;
  Vector apply_left(const Vector& g) const;
  double inner(const Vector& g, const Vector& f) const;
  double norm(const Vector& f) const { return std::sqrt(inner(f, f)); }
};

/// Kernel W = diag(phi) P of a finite chain; requires phi >= 0.
KernelOperator build_weighted_kernel(const FiniteMarkovModel& model, std::span<const double> phi);

/// Kernel given directly as a non-negative matrix under counting measure.
KernelOperator kernel_from_matrix(Matrix W);

using NodeFunction = std::function<double(double)>;
using TransitionDensity = std::function<double(double from, double to)>;

/// Nystrom discretization of phi(u) p(v|u) on a quadrature rule.
KernelOperator build_weighted_kernel(const Quadrature& rule, const TransitionDensity& p,
                                     const NodeFunction& phi);

/// Countable chain p(y|x) = (1 - e^{-(x+1)}) e^{-(x+1) y} truncated to {0..N}.
KernelOperator geometric_rate_kernel(int N, const NodeFunction& phi);
/// Continuous chain p(y|x) = (x+1) e^{-(x+1) y} on [0, x_max], Gauss-Legendre nodes.
KernelOperator exponential_rate_kernel(double x_max, int nodes, const NodeFunction& phi);
/// AR(1) transition y = alpha x + Z, Z ~ N(0,1), on [-x_max, x_max].
KernelOperator ar1_gaussian_kernel(double alpha, double x_max, int nodes, const NodeFunction& phi);

/// Row i holds the weights of the integral over {y : |x_i - y| > a} of the
/// piecewise-linear interpolant on the uniform grid `grid`.
Matrix separation_weights(double a, const Quadrature& grid);

/// Kernel e^{chi(x)} 1(|x - y| > a) on a uniform grid of [lo, hi] with
/// `intervals` sub-intervals. The indicator is integrated exactly against the
/// piecewise-linear interpolant, so every entry stays non-negative.
KernelOperator indicator_kernel(double a, double lo, double hi, int intervals,
                                const NodeFunction& chi);

/// Stationary densities of the named continuous families at the kernel nodes,
/// normalized against the node weights.
Vector ar1_stationary_density(const KernelOperator& op, double alpha);
Vector exponential_rate_density(const KernelOperator& op);

/// Smallest k with the (k+1)-fold iterated kernel strictly positive, if any k <= k_max.
std::optional<int> check_doeblin(const KernelOperator& op, int k_max);

struct HSReport {
  double hs_value = 0.0;
  bool finite = true;
};

/// sum_{x,y} W(x,y) W(y,x) w_x w_y.
HSReport hilbert_schmidt_check(const KernelOperator& op);

/// Hilbert-Schmidt value under successive node doublings; `finite` is false
/// when the values keep growing instead of settling.
HSReport hilbert_schmidt_under_refinement(const std::function<KernelOperator(int)>& build,
                                          int nodes0, int levels);

struct KreinRutmanResult {
  double mu = 0.0;
  Vector phi_right;  ///< W Phi = mu Phi
  Vector psi_left;   ///< Psi W^T = mu Psi, scaled so <Psi, Phi> = 1
  double gap_estimate = 0.0;  ///< 1 - observed contraction ratio of iterate differences
  double residual_right = 0.0;
  double residual_left = 0.0;
  int iterations = 0;
};

/// Principal eigen-data by power iteration on W and W^T from positive starts.
KreinRutmanResult krein_rutman(const KernelOperator& op, double tol = 1e-13,
                               int max_iter = 200000);

/// Largest singular value of W in L2(nodes, weights).
double operator_norm(const KernelOperator& op, double tol = 1e-12, int max_iter = 100000);

/// Which sufficient conditions were verified for the multiplicative rates.
struct ConditionReport {
  std::optional<int> doeblin_k;
  HSReport hilbert_schmidt;
  bool bounded_plogp = false;  ///< p |ln p| bounded on the nodes
  bool l2_weights = false;     ///< phi, lambda ln lambda, pi ln pi square-summable on the nodes
};

struct MultiplicativeRateReport {
  double mu = 0.0;
  double B0 = 0.0;  ///< ln mu
  double norm = 0.0;  ///< operator norm, reported alongside mu
  KreinRutmanResult kr;
  ConditionReport conditions;
};

/// B0 = ln mu of the weighted kernel of a finite chain.
MultiplicativeRateReport primary_rate_multiplicative(const FiniteMarkovModel& model,
                                                     std::span<const double> phi,
                                                     int doeblin_k_max = -1);
MultiplicativeRateReport primary_rate_multiplicative(const KernelOperator& op, int doeblin_k_max = 2);

/// A real number stored as mantissa * exp(log_scale), for quantities of order mu^n.
struct LogScaled {
  double mantissa = 0.0;
  double log_scale = 0.0;
  double value() const { return mantissa * std::exp(log_scale); }
  double log_abs() const { return std::log(std::abs(mantissa)) + log_scale; }
};

/// Exact WE of the multiplicative weight prod phi(X_j) for X_0 with density
/// `initial` on the kernel nodes: boundary term -<lambda ln lambda, W^{n-1} phi>
/// plus the bulk sum over l of <lambda W^{l-1}, [W ln p] W^{n-1-l} phi>.
LogScaled exact_joint_we_multiplicative(const KernelOperator& op, const Vector& initial, int n,
                                        bool boundary_term = true);
LogScaled exact_joint_we_multiplicative(const FiniteMarkovModel& model, std::span<const double> phi,
                                        int n, Start start = Start::Stationary);

struct SecondaryMultiplicativeResult {
  /// -(1/mu^2) <Psi,phi> <Phi,pi> sum Psi(x) Phi(y) phi(x) p(y|x) ln p(y|x)
  double B1 = 0.0;
  /// Same prefactor with the eigenfunctions swapped: Phi(x) Psi(y).
  double B1_swapped = 0.0;
};

SecondaryMultiplicativeResult secondary_rate_multiplicative(const KernelOperator& op,
                                                            const KreinRutmanResult& kr,
                                                            const Vector& stationary);
SecondaryMultiplicativeResult secondary_rate_multiplicative(const FiniteMarkovModel& model,
                                                            std::span<const double> phi);

/// Node count doubling until the principal eigenvalue settles.
struct RefinementResult {
  std::vector<int> sizes;
  std::vector<double> mu;   ///< raw eigenvalue per level
  double mu_best = 0.0;     ///< final (extrapolated when requested) value
  bool converged = false;
};

/// Doubles the size parameter passed to `build` until successive estimates
/// differ by less than `tol`. With `richardson_order` > 0 the estimates are
/// Richardson-extrapolated assuming an error expansion in h^order.
RefinementResult refine_perron(const std::function<KernelOperator(int)>& build, int size0,
                               double tol, int max_size, int richardson_order = 0);

}  // namespace werate
