#include "werate/iid_rates.hpp"

#include <cmath>
#include <limits>

namespace werate {

AdditiveRatePair iid_additive_rates(const DiscreteModel& model) {
  return {standard_entropy(model.pmf()) * model.mean_weight(), weighted_entropy(model)};
}

double iid_additive_we(const DiscreteModel& model, int n) {
  if (n < 1) throw ValidationError("n must be >= 1");
  const auto r = iid_additive_rates(model);
  const double nn = n;
  return nn * (nn - 1.0) * r.A0 + nn * r.A1;
}

double iid_multiplicative_we(const DiscreteModel& model, int n) {
  if (n < 1) throw ValidationError("n must be >= 1");
  model.require_nonnegative_weight();
  const double mean = model.mean_weight();
  return n * weighted_entropy(model) * std::pow(mean, n - 1);
}

MultiplicativeRatePair iid_multiplicative_rates(const DiscreteModel& model) {
  model.require_nonnegative_weight();
  MultiplicativeRatePair r;
  r.B0 = model.mean_weight();
  r.B1 = weighted_entropy(model);
  r.zero_factor = r.B0 == 0.0;
  r.B0_log = r.zero_factor ? -std::numeric_limits<double>::infinity() : std::log(r.B0);
  return r;
}

}  // namespace werate
