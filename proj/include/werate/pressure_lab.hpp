#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "werate/spectral_kr.hpp"

namespace werate {

/// Xi_n = sum pi(x_0) prod_{j<n} W(x_{j-1}, x_j) phi(x_{n-1}) = <pi, W^{n-1} phi>
/// under counting measure, carried in log scale.
LogScaled partition_function(const FiniteMarkovModel& model, std::span<const double> phi, int n);

struct PressureSeries {
  std::vector<int> n;
  std::vector<double> cesaro;  ///< (1/n) ln Xi_n
  std::vector<double> slope;   ///< ln(Xi_n / Xi_{n-1})
};

/// (1/n) ln Xi_n for n = 2..n_max.
PressureSeries pressure_estimate(const FiniteMarkovModel& model, std::span<const double> phi,
                                 int n_max);

/// Tilted string law pi(x_0) prod W phi(x_{n-1}) / Xi_n, enumerated with x_0
/// as the most significant digit.
std::vector<double> tilted_pmf(const FiniteMarkovModel& model, std::span<const double> phi, int n);

/// Markov chain p~(y|x) = W(x,y) Phi(y) / (mu Phi(x)) with stationary law Psi * Phi.
struct TwistedChain {
  Matrix P;
  Vector pi;  ///< Psi(x) Phi(x)

  FiniteMarkovModel model() const { return FiniteMarkovModel(P); }
  double row_sum_defect() const;
  double stationarity_defect() const;
};

TwistedChain twist(const FiniteMarkovModel& model, std::span<const double> phi,
                   const KreinRutmanResult& kr);

struct VariationalAudit {
  double h_Q = 0.0;  ///< entropy rate of the candidate
  double L_Q = 0.0;  ///< E_Q ln W(X_0, X_1)
  double slack = 0.0;  ///< ln mu - h_Q - L_Q
  bool applicable = true;  ///< false when Q charges a transition with W = 0
};

VariationalAudit variational_audit(const FiniteMarkovModel& Q, const FiniteMarkovModel& model,
                                   std::span<const double> phi, const KreinRutmanResult& kr);

struct AuditReport {
  double mu = 0.0;
  double B0 = 0.0;
  std::vector<VariationalAudit> candidates;
  double min_slack = 0.0;
  double equality_witness_residual = 0.0;  ///< |slack| of the twisted chain
};

/// Audits `count` candidates obtained by Dirichlet-perturbing rows of the
/// twisted chain with concentration `concentration` (rows keep their support).
AuditReport randomized_audit(const FiniteMarkovModel& model, std::span<const double> phi,
                             int count, std::uint64_t seed, double concentration = 20.0);

/// KL(p~_n || tilted_n) for the twisted chain started from its stationary law,
/// in closed form.
double twisted_tilted_kl(const FiniteMarkovModel& model, std::span<const double> phi,
                         const KreinRutmanResult& kr, int n);

/// E_Q ln q_n - E_Q ln tilted_n for a stationary candidate Q, by enumeration.
double gibbs_gap_enumerated(const FiniteMarkovModel& Q, const FiniteMarkovModel& model,
                            std::span<const double> phi, int n);

/// Reference measure for the separated-sequence examples.
struct TopoDomain {
  enum class Reference { StandardNormal, Flat };
  Reference reference = Reference::StandardNormal;
  double lo = -8.0;
  double hi = 8.0;
  int intervals = 256;  ///< finest grid used for the direct recursion

  static TopoDomain standard_normal(double x_max = 8.0, int intervals = 256) {
    return {Reference::StandardNormal, -x_max, x_max, intervals};
  }
  static TopoDomain flat(double lo, double hi, int intervals = 256) {
    return {Reference::Flat, lo, hi, intervals};
  }
};

struct TopologicalResult {
  double log_mu = 0.0;  ///< extrapolated ln mu
  RefinementResult refinement;
};

/// Growth rate of the reference volume of {|x_i - x_{i-1}| > a} via the KR
/// eigenvalue of p(x) 1(|x - y| > a), refined by grid doubling with
/// Richardson extrapolation.
TopologicalResult topological_entropy(double a, const TopoDomain& domain = TopoDomain::standard_normal(),
                                      double tol = 1e-8);

/// ln mu of e^{chi(x)} 1(|x-y| > a) against Lebesgue measure on the domain.
TopologicalResult topological_pressure(const NodeFunction& chi, double a, const TopoDomain& domain,
                                       double tol = 1e-8);

struct DirectVolume {
  std::vector<double> log_volume;  ///< ln nu^n(A_0^{n-1}) for n = 1..n_max
  double cesaro = 0.0;       ///< (1/n) ln nu^n at n_max
  double step_growth = 0.0;  ///< ln(nu^n / nu^{n-1}) at n_max
};

/// Direct recursion v_{n+1}(y) = int v_n(x) p(x) 1(|x-y| > a) dx on the
/// domain's finest grid.
DirectVolume topological_entropy_direct(double a, int n, const TopoDomain& domain = TopoDomain::standard_normal());

}  // namespace werate
