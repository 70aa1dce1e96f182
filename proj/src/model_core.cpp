#include "werate/model_core.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace werate {

double to_base(double nats, LogBase base) {
  return base == LogBase::Base2 ? nats / std::numbers::ln2 : nats;
}

double from_base(double value, LogBase base) {
  return base == LogBase::Base2 ? value * std::numbers::ln2 : value;
}

std::vector<double> checked_pmf(std::span<const double> pmf, const char* what) {
  if (pmf.empty()) throw ValidationError(std::string(what) + ": empty");
  double total = 0.0;
  for (double v : pmf) {
    if (!std::isfinite(v) || v < 0.0)
      throw ValidationError(std::string(what) + ": entries must be finite and non-negative");
    total += v;
  }
  const double dev = std::abs(total - 1.0);
  std::vector<double> out(pmf.begin(), pmf.end());
  if (dev <= kNormTolerance) return out;
  if (dev < kRenormalizeLimit) {
    for (double& v : out) v /= total;
    return out;
  }
  throw ValidationError(std::string(what) + ": sums to " + std::to_string(total) + ", not 1");
}

DiscreteModel::DiscreteModel(std::vector<double> pmf, std::vector<double> phi)
    : pmf_(checked_pmf(pmf)), phi_(std::move(phi)) {
  if (phi_.size() != pmf_.size())
    throw ValidationError("phi must have one value per symbol");
  for (double v : phi_)
    if (!std::isfinite(v)) throw ValidationError("phi must be finite");
}

DiscreteModel DiscreteModel::unweighted(std::vector<double> pmf) {
  std::vector<double> ones(pmf.size(), 1.0);
  return DiscreteModel(std::move(pmf), std::move(ones));
}

double DiscreteModel::mean_weight() const {
  return std::inner_product(pmf_.begin(), pmf_.end(), phi_.begin(), 0.0);
}

void DiscreteModel::require_nonnegative_weight() const {
  for (double v : phi_)
    if (v < 0.0) throw ValidationError("weight function must be non-negative here");
}

double weighted_information(std::size_t x, const DiscreteModel& model) {
  if (x >= model.alphabet_size()) throw ValidationError("symbol outside the alphabet");
  const double w = model.weight(x);
  if (w == 0.0) return 0.0;
  const double p = model.p(x);
  if (p == 0.0)
    throw InfiniteInformationError("symbol " + std::to_string(x) +
                                   " has zero probability but non-zero weight");
  return -w * std::log(p);
}

double standard_entropy(std::span<const double> pmf) {
  double h = 0.0;
  for (double p : pmf)
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

double weighted_entropy(const DiscreteModel& model) {
  double h = 0.0;
  for (std::size_t x = 0; x < model.alphabet_size(); ++x) {
    const double p = model.p(x);
    const double w = model.weight(x);
    if (p > 0.0 && w != 0.0) h -= w * p * std::log(p);
  }
  return h;
}

JointWF JointWF::additive(std::vector<double> phi) {
  return JointWF(Kind::Additive, std::move(phi), 0.0, {});
}

JointWF JointWF::multiplicative(std::vector<double> phi) {
  return JointWF(Kind::Multiplicative, std::move(phi), 0.0, {});
}

JointWF JointWF::constant(double c) { return JointWF(Kind::Constant, {}, c, {}); }

JointWF JointWF::custom(Evaluator f) {
  if (!f) throw ValidationError("custom weight function is empty");
  return JointWF(Kind::Custom, {}, 0.0, std::move(f));
}

double JointWF::operator()(std::span<const int> word) const {
  switch (kind_) {
    case Kind::Additive: {
      double s = 0.0;
      for (int x : word) s += phi_.at(static_cast<std::size_t>(x));
      return s;
    }
    case Kind::Multiplicative: {
      double s = 1.0;
      for (int x : word) s *= phi_.at(static_cast<std::size_t>(x));
      return s;
    }
    case Kind::Constant:
      return constant_;
    case Kind::Custom:
      return custom_(word);
  }
  return 0.0;
}

std::uint64_t guarded_string_count(std::size_t alphabet_size, int n) {
  if (n < 1) throw ValidationError("string length must be >= 1");
  if (alphabet_size == 0) throw ValidationError("empty alphabet");
  std::uint64_t count = 1;
  for (int j = 0; j < n; ++j) {
    if (count > kMaxEnumeratedStrings / alphabet_size)
      throw SizeGuardError("enumeration of " + std::to_string(alphabet_size) + "^" +
                           std::to_string(n) + " strings exceeds the 1e7 budget");
    count *= alphabet_size;
  }
  return count;
}

void decode_word(std::uint64_t index, std::size_t alphabet_size, std::span<int> word) {
  for (std::size_t j = word.size(); j-- > 0;) {
    word[j] = static_cast<int>(index % alphabet_size);
    index /= alphabet_size;
  }
}

double joint_weighted_entropy_enumerated(std::span<const double> joint_pmf, const JointWF& wf,
                                         std::size_t alphabet_size, int n) {
  const std::uint64_t count = guarded_string_count(alphabet_size, n);
  if (joint_pmf.size() != count)
    throw ValidationError("joint pmf has the wrong number of entries");
  std::vector<int> word(static_cast<std::size_t>(n));
  double total = 0.0;
  for (std::uint64_t i = 0; i < count; ++i) {
    const double f = joint_pmf[i];
    if (f <= 0.0) continue;
    decode_word(i, alphabet_size, word);
    const double w = wf(word);
    if (w != 0.0) total -= w * f * std::log(f);
  }
  return total;
}

std::vector<double> product_pmf(std::span<const double> pmf, int n) {
  const std::uint64_t count = guarded_string_count(pmf.size(), n);
  std::vector<double> out(count);
  std::vector<int> word(static_cast<std::size_t>(n));
  for (std::uint64_t i = 0; i < count; ++i) {
    decode_word(i, pmf.size(), word);
    double f = 1.0;
    for (int x : word) f *= pmf[static_cast<std::size_t>(x)];
    out[i] = f;
  }
  return out;
}

}  // namespace werate
