#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "werate/spectral_kr.hpp"

namespace werate {

/// Zero-mean Gaussian vector X_0..X_{n-1}, given by its covariance or as an
/// AR(1) block X_j = alpha X_{j-1} + Z_j started from stationarity.
class GaussianModel {
 public:
  static GaussianModel from_covariance(Matrix C);
  static GaussianModel ar1(double alpha, int n);

  int dimension() const { return static_cast<int>(C_.rows()); }
  const Matrix& covariance() const { return C_; }
  const Matrix& precision() const { return precision_; }
  /// Lower Cholesky factor of the covariance.
  const Matrix& factor() const { return L_; }
  double log_det_covariance() const { return log_det_; }
  std::optional<double> ar1_alpha() const { return alpha_; }

  /// x^T C^{-1} x.
  double quadratic_form(const Vector& x) const;
  /// -ln f(x).
  double information(const Vector& x) const;

 private:
  GaussianModel() = default;
  void factorize();

  Matrix C_;
  Matrix precision_;
  Matrix L_;
  double log_det_ = 0.0;
  std::optional<double> alpha_;
};

inline GaussianModel ar1_model(double alpha, int n) { return GaussianModel::ar1(alpha, n); }

/// Determinant of the AR(1) tridiagonal precision by the three-term recurrence.
double ar1_precision_determinant(double alpha, int n);

/// H = 1/2 ln[(2 pi e)^n det C].
double gaussian_entropy(const GaussianModel& model);

/// Weight functions on R^n with Gaussian closed forms.
struct GaussianWFSpec {
  enum class Kind { ConstantTimesN, Quadratic, ExpQuadratic, ExpLinear };
  Kind kind = Kind::ConstantTimesN;
  double alpha = 1.0;  ///< ConstantTimesN: phi = alpha n
  Matrix A;            ///< Quadratic: phi = x^T A x; ExpQuadratic: exponent matrix
  Vector t;            ///< ExpQuadratic / ExpLinear shift

  static GaussianWFSpec constant_times_n(double alpha);
  static GaussianWFSpec quadratic(Matrix A);
  static GaussianWFSpec exp_quadratic(Matrix A, Vector t);
  static GaussianWFSpec exp_linear(Vector t);

  /// phi(x) for the given model (the exponential kinds involve C^{-1}).
  double operator()(const GaussianModel& model, const Vector& x) const;
};

/// alpha n H.
double we_constant_wf(const GaussianModel& model, double alpha);

/// The two moments the additive-form WE needs.
struct AdditiveMoments {
  double E_phi = 0.0;   ///< E[phi(X)]
  double E_Qphi = 0.0;  ///< E[(X^T C^{-1} X) phi(X)]
};

/// phi = c0 + b^T x + x^T A x, by Isserlis moments.
AdditiveMoments polynomial_moments(const GaussianModel& model, double c0, const Vector& b,
                                   const Matrix& A);
/// phi = x^T A x.
AdditiveMoments quadratic_moments(const GaussianModel& model, const Matrix& A);

/// WE = (H - n/2) E[phi] + 1/2 E[(X^T C^{-1} X) phi].
double we_additive_gaussian(const GaussianModel& model, const AdditiveMoments& moments);

/// phi = x^T A x. The WI is (x^T A x)(wi_offset + x^T C^{-1} x / 2).
struct QuadraticWF {
  double entropy = 0.0;
  double wi_offset = 0.0;  ///< H - n/2
  double trace_AC = 0.0;
  double trace_ACAC = 0.0;
  AdditiveMoments moments;
  double we = 0.0;  ///< tr(AC)(H + 1)
};

QuadraticWF we_quadratic_wf(const GaussianModel& model, const Matrix& A);

/// phi = exp[x^T (C^{-1} - A) t + x^T A x / 2]; requires C^{-1} - A positive definite.
struct ExpQuadraticWF {
  double log_E_phi = 0.0;  ///< t^T M t / 2 - ln det(I - C A) / 2, M = C^{-1} - A
  double E_phi = 0.0;
  double trace_term = 0.0;  ///< tr (I - A C)^{-1}
  double shift_term = 0.0;  ///< t^T C^{-1} t
  double we = 0.0;  ///< E_phi (H - n/2 + trace_term/2 + shift_term/2)
};

ExpQuadraticWF we_exp_quadratic(const GaussianModel& model, const Matrix& A, const Vector& t);

/// Closed-form WE for any GaussianWFSpec.
double we_closed_form(const GaussianModel& model, const GaussianWFSpec& wf);

struct MCOracleConfig {
  std::uint64_t samples = 1'000'000;
  std::uint64_t seed = 1;
  int batches = 100;
  int threads = 1;

  void validate() const;
};

struct MCEstimate {
  double mean = 0.0;
  double se = 0.0;  ///< batch-means standard error
  std::uint64_t samples = 0;
  int batches = 0;
};

/// Batch-means Monte Carlo estimate of E[g(X, -ln f(X))] with X = L Z.
/// Each batch draws from its own seeded generator; batches are reduced in
/// index order, so the result does not depend on the thread count.
MCEstimate mc_expectation(const GaussianModel& model,
                          const std::function<double(const Vector& x, double information)>& g,
                          const MCOracleConfig& config);

/// E[phi(X) (-ln f(X))].
MCEstimate mc_weighted_entropy(const GaussianModel& model,
                               const std::function<double(const Vector&)>& phi,
                               const MCOracleConfig& config);
MCEstimate mc_weighted_entropy(const GaussianModel& model, const GaussianWFSpec& wf,
                               const MCOracleConfig& config);

struct AR1Quadrature {
  double x_max_sd = 12.0;  ///< half-width in stationary standard deviations
  int nodes = 160;
};

/// Multiplicative WE of prod phi(X_j) for the stationary AR(1) block, by
/// transfer passes with W(u, v) = phi(u) N(v; alpha u, 1).
LogScaled ar1_we_multiplicative(double alpha, const NodeFunction& phi, int n,
                                const AR1Quadrature& quad = {});
/// ln mu of the same kernel.
double ar1_log_mu(double alpha, const NodeFunction& phi, const AR1Quadrature& quad = {});

/// -ln f(x) * phi.
double gaussian_weighted_information(const GaussianModel& model, const Vector& x, double phi_x);

/// (WE - E[Q phi]/2) / (n E[phi]); tends to h - 1/2.
double normalizer_expected(const GaussianModel& model, double we, const AdditiveMoments& moments);
/// (I(x) - Q(x) phi(x)/2) / (n phi(x)); tends to h - 1/2.
double normalizer_pointwise(const GaussianModel& model, const Vector& x, double phi_x);

/// 2 I(x)/phi(x) + n - x^T C^{-1} x, which does not depend on x.
double wi_invariant(const GaussianModel& model, const Vector& x, double phi_x);

struct ConstancyReport {
  int points = 0;
  double min_value = 0.0;
  double max_value = 0.0;
  double spread = 0.0;
  double entropy = 0.0;
  double max_dev_from_twice_entropy = 0.0;  ///< max |value - 2H|
};

/// Evaluates wi_invariant at `points` draws of N(0, C) under `wf`.
ConstancyReport wi_constancy(const GaussianModel& model, const GaussianWFSpec& wf, int points,
                             std::uint64_t seed);

}  // namespace werate
