#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "werate/errors.hpp"

namespace werate {

/// Largest number of strings the enumeration oracle will visit.
inline constexpr std::uint64_t kMaxEnumeratedStrings = 10'000'000;

/// Absolute tolerance on normalization of probability vectors.
inline constexpr double kNormTolerance = 1e-12;
/// Deviations below this are silently renormalized; above it the input is rejected.
inline constexpr double kRenormalizeLimit = 1e-9;

enum class LogBase { Natural, Base2 };

/// Converts a value computed in nats to the requested base.
double to_base(double nats, LogBase base);
/// Converts a value expressed in `base` back to nats.
double from_base(double value, LogBase base);

/// Validates a probability vector and returns it, renormalized if the
/// deviation from 1 lies in (kNormTolerance, kRenormalizeLimit).
std::vector<double> checked_pmf(std::span<const double> pmf, const char* what = "pmf");

/// A finite alphabet with a probability mass function and a one-digit weight.
class DiscreteModel {
 public:
  DiscreteModel(std::vector<double> pmf, std::vector<double> phi);

  /// Same pmf with the weight fixed at 1.
  static DiscreteModel unweighted(std::vector<double> pmf);

  std::size_t alphabet_size() const { return pmf_.size(); }
  std::span<const double> pmf() const { return pmf_; }
  std::span<const double> phi() const { return phi_; }
  double p(std::size_t x) const { return pmf_[x]; }
  double weight(std::size_t x) const { return phi_[x]; }

  /// E_p[phi].
  double mean_weight() const;
  /// Throws ValidationError if some phi(x) < 0.
  void require_nonnegative_weight() const;

 private:
  std::vector<double> pmf_;
  std::vector<double> phi_;
};

/// -phi(x) ln p(x), with 0 for phi(x) = 0.
double weighted_information(std::size_t x, const DiscreteModel& model);

/// -sum p ln p with 0 ln 0 = 0.
double standard_entropy(std::span<const double> pmf);

/// -sum phi p ln p.
double weighted_entropy(const DiscreteModel& model);

/// Alias of weighted_entropy, named after its role as the one-digit quantity
/// in the i.i.d. rate formulas.
inline double one_digit_we(const DiscreteModel& model) { return weighted_entropy(model); }

/// Weight function on strings x_0..x_{n-1}.
class JointWF {
 public:
  enum class Kind { Additive, Multiplicative, Constant, Custom };
  using Evaluator = std::function<double(std::span<const int>)>;

  static JointWF additive(std::vector<double> phi);
  static JointWF multiplicative(std::vector<double> phi);
  static JointWF constant(double c);
  static JointWF custom(Evaluator f);

  Kind kind() const { return kind_; }
  double operator()(std::span<const int> word) const;

 private:
  JointWF(Kind kind, std::vector<double> phi, double c, Evaluator f)
      : kind_(kind), phi_(std::move(phi)), constant_(c), custom_(std::move(f)) {}

  Kind kind_;
  std::vector<double> phi_;
  double constant_ = 0.0;
  Evaluator custom_;
};

/// Number of strings of length n over an alphabet, or throws SizeGuardError
/// when it exceeds kMaxEnumeratedStrings.
std::uint64_t guarded_string_count(std::size_t alphabet_size, int n);

/// Decodes string index `index` (x_0 most significant) into `word`.
void decode_word(std::uint64_t index, std::size_t alphabet_size, std::span<int> word);

/// -sum over all strings of phi_n(x) f_n(x) ln f_n(x). `joint_pmf` is indexed
/// with x_0 as the most significant digit and must have alphabet_size^n entries.
double joint_weighted_entropy_enumerated(std::span<const double> joint_pmf, const JointWF& wf,
                                         std::size_t alphabet_size, int n);

/// Product law p^{\otimes n} laid out for joint_weighted_entropy_enumerated.
std::vector<double> product_pmf(std::span<const double> pmf, int n);

}  // namespace werate
