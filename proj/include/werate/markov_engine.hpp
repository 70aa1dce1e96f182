#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "werate/errors.hpp"

namespace werate {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Stationary law of an irreducible row-stochastic matrix.
/// Throws ValidationError for reducible chains.
Vector stationary_distribution(const Matrix& P);

/// True iff the directed graph {x -> y : P(x,y) > 0} is strongly connected.
bool is_irreducible(const Matrix& P);

/// Homogeneous finite-state Markov chain with P(x, y) = p(y | x).
class FiniteMarkovModel {
 public:
  /// Validates rows of P (renormalizing tiny deviations), computes pi.
  explicit FiniteMarkovModel(Matrix P);
  /// Same, with an explicit initial law; requires supp(lambda) within supp(pi).
  FiniteMarkovModel(Matrix P, Vector lambda);

  static FiniteMarkovModel from_rows(const std::vector<std::vector<double>>& rows);

  int state_count() const { return static_cast<int>(P_.rows()); }
  const Matrix& P() const { return P_; }
  const Vector& pi() const { return pi_; }
  /// Initial law; equals pi unless one was supplied.
  const Vector& lambda() const { return lambda_; }
  bool has_initial_law() const { return has_lambda_; }

 private:
  Matrix P_;
  Vector pi_;
  Vector lambda_;
  bool has_lambda_ = false;
};

/// Which law the first symbol is drawn from, and whether its information
/// -ln lambda(X_0) enters the weighted information.
enum class Start {
  Stationary,          ///< X_0 ~ pi, boundary term -ln pi(X_0) included
  Initial,             ///< X_0 ~ lambda, boundary term -ln lambda(X_0) included
  InitialConditional,  ///< X_0 ~ lambda, only transition terms counted
};

/// Entropy rate h = -sum_x pi(x) sum_y p(y|x) ln p(y|x).
double entropy_rate(const FiniteMarkovModel& model);

/// E_pi[phi].
double stationary_mean(const FiniteMarkovModel& model, std::span<const double> phi);

struct DoeblinReport {
  double rho = 0.0;              ///< min_{x,y} P(x,y)
  std::optional<int> k;          ///< smallest k with P^{k+1} > 0 entrywise
  /// 2 (1 - rho)^s, the a-priori bound on |p^{(s)}(x,y) - pi(y)|.
  double geometric_bound(int s) const;
};

DoeblinReport doeblin_report(const FiniteMarkovModel& model, int k_max = -1);

/// Exact WE of X_0..X_{n-1} for the additive weight sum_j phi(X_j), in
/// O(n * states^2) by a forward pass over per-state partial moments.
double exact_joint_we_additive(const FiniteMarkovModel& model, std::span<const double> phi, int n,
                               Start start = Start::Stationary);

/// A0 = E_pi[phi] * h.
double primary_rate_additive(const FiniteMarkovModel& model, std::span<const double> phi);

struct SecondaryRateResult {
  double A1 = 0.0;
  int terms = 0;         ///< number of s-steps summed per branch
  double tail_bound = 0.0;  ///< Doeblin bound on the neglected tail
};

/// A1 for a centred weight (E_pi[phi] = 0) on a chain with all P entries
/// positive, by summing the two covariance series until the Doeblin tail
/// bound falls below `tol`. `min_terms` forces a deeper truncation.
SecondaryRateResult secondary_rate_additive(const FiniteMarkovModel& model,
                                            std::span<const double> phi, double tol = 1e-14,
                                            int min_terms = 0);

/// Augments a k-th order chain on `alphabet` symbols into a first-order chain on k-tuples.
/// `conditional(context, y)` gives p(y | context) for a context of length k.
Matrix augment_k_order(int alphabet, int order,
                       const std::function<double(std::span<const int>, int)>& conditional);

}  // namespace werate
