#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "werate/spectral_kr.hpp"

namespace werate {

/// Stationary Gaussian AR(1): X_{k+1} = alpha X_k + Z_{k+1}, X_0 ~ N(0, 1/(1-alpha^2)).
struct AR1Process {
  double alpha = 0.5;
  double stationary_variance() const { return 1.0 / (1.0 - alpha * alpha); }
};

struct Trajectory {
  std::vector<int> symbols;    ///< finite-state paths
  std::vector<double> values;  ///< real-valued paths
  std::uint64_t seed = 0;

  int length() const { return static_cast<int>(symbols.empty() ? values.size() : symbols.size()); }
};

/// X_0 ~ lambda, then kernel draws; uniforms come from the top 53 bits of mt19937_64.
Trajectory simulate(const FiniteMarkovModel& model, int n, std::uint64_t seed);
Trajectory simulate(const AR1Process& process, int n, std::uint64_t seed);

/// 1, 2, 4, ... up to n, with n appended when it is not a power of two.
std::vector<int> geometric_checkpoints(int n);

struct ConvergenceReport {
  std::string statistic;
  double target = 0.0;
  std::vector<int> checkpoints;
  std::vector<double> estimates;  ///< NaN where a checkpoint was skipped
  std::vector<bool> skipped;
  /// (1/n) ln(-ln f_n) per checkpoint; filled by the multiplicative statistic only.
  std::vector<double> information_log_term;
  double final_error = 0.0;  ///< |last estimate - target|
  double batch_se = 0.0;     ///< batch-means standard error of the final estimate
  double we_rate = 0.0;      ///< ln mu, printed beside the WI target; NaN when not computed
  std::uint64_t seed = 0;
};

/// -(1/n) ln f_n(X_0^{n-1}) -> h.
ConvergenceReport empirical_smb(const Trajectory& traj, const FiniteMarkovModel& model);
ConvergenceReport empirical_smb(const Trajectory& traj, const AR1Process& process);

/// (sum phi(X_j)) (-ln f_n) / n^2 -> E_pi[phi] h.
ConvergenceReport empirical_wi_additive(const Trajectory& traj, const FiniteMarkovModel& model,
                                        std::span<const double> phi);
ConvergenceReport empirical_wi_additive(const Trajectory& traj, const AR1Process& process,
                                        const NodeFunction& phi);

/// (1/n) ln[prod phi(X_j) (-ln f_n)] -> E_pi[ln phi].
ConvergenceReport empirical_wi_multiplicative(const Trajectory& traj, const FiniteMarkovModel& model,
                                              std::span<const double> phi);
ConvergenceReport empirical_wi_multiplicative(const Trajectory& traj, const AR1Process& process,
                                              const NodeFunction& phi);

/// E_pi[g] for the AR(1) stationary law by Gauss-Legendre quadrature.
double ar1_stationary_expectation(const AR1Process& process, const NodeFunction& g);

struct ReplicateSummary {
  std::string statistic;
  double target = 0.0;
  int n = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<double> finals;
  double mean = 0.0;
  double se = 0.0;  ///< standard error of the mean over seeds
  double max_abs_error = 0.0;
  double max_relative_error = 0.0;  ///< NaN when target = 0
};

/// Runs `run(seed)` for each seed with up to `threads` workers; reports are
/// returned in seed order regardless of scheduling.
std::vector<ConvergenceReport> run_replicates(const std::vector<std::uint64_t>& seeds,
                                              const std::function<ConvergenceReport(std::uint64_t)>& run,
                                              int threads = 1);

ReplicateSummary summarize(const std::vector<ConvergenceReport>& reports);

/// CSV with header seed,n_checkpoint,statistic,value,target,abs_error.
void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceReport>& reports);

}  // namespace werate
