#pragma once

#include "werate/model_core.hpp"

namespace werate {

/// Rates for an additive weight function: WE(n) = n(n-1) A0 + n A1.
struct AdditiveRatePair {
  double A0 = 0.0;  ///< H(p) * E[phi]
  double A1 = 0.0;  ///< one-digit weighted entropy
};

/// Rates for a multiplicative weight function: WE(n) = n B1 B0^{n-1}.
struct MultiplicativeRatePair {
  double B0 = 0.0;      ///< E[phi], the per-step factor
  double B0_log = 0.0;  ///< ln E[phi]; -inf when E[phi] = 0
  double B1 = 0.0;      ///< one-digit weighted entropy
  bool zero_factor = false;
};

AdditiveRatePair iid_additive_rates(const DiscreteModel& model);

/// Closed-form WE of n i.i.d. digits under the additive weight.
double iid_additive_we(const DiscreteModel& model, int n);

/// Closed-form WE of n i.i.d. digits under the multiplicative weight. Requires phi >= 0.
double iid_multiplicative_we(const DiscreteModel& model, int n);

MultiplicativeRatePair iid_multiplicative_rates(const DiscreteModel& model);

}  // namespace werate
