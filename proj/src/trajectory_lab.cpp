#include "werate/trajectory_lab.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <thread>

#include "werate/gaussian_suite.hpp"
#include "werate/model_core.hpp"

namespace werate {

namespace {

constexpr int kBatches = 32;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

int draw(std::mt19937_64& rng, const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  const double u = uniform01(rng);
  double cum = 0.0;
  int last = -1;
  for (int y = 0; y < row.size(); ++y) {
    if (row(y) <= 0.0) continue;
    cum += row(y);
    last = y;
    if (u < cum) return y;
  }
  return last;
}

double gaussian_information(double x, double mean, double var) {
  const double d = x - mean;
  return 0.5 * (std::log(2.0 * std::numbers::pi * var) + d * d / var);
}

// Per-step information -ln lambda(x_0), -ln p(x_l | x_{l-1}).
std::vector<double> step_information(const Trajectory& traj, const FiniteMarkovModel& model) {
  if (traj.symbols.empty()) throw ValidationError("finite-state statistic needs a symbol path");
  const int k = model.state_count();
  std::vector<double> xi(traj.symbols.size());
  for (std::size_t l = 0; l < traj.symbols.size(); ++l) {
    const int y = traj.symbols[l];
    if (y < 0 || y >= k) throw ValidationError("path symbol out of range");
    const double p = l == 0 ? model.lambda()(y) : model.P()(traj.symbols[l - 1], y);
    if (!(p > 0.0)) throw InfiniteInformationError("path uses a zero-probability transition");
    xi[l] = -std::log(p);
  }
  return xi;
}

std::vector<double> step_information(const Trajectory& traj, const AR1Process& process) {
  if (traj.values.empty()) throw ValidationError("AR(1) statistic needs a real-valued path");
  std::vector<double> xi(traj.values.size());
  for (std::size_t l = 0; l < traj.values.size(); ++l)
    xi[l] = l == 0 ? gaussian_information(traj.values[0], 0.0, process.stationary_variance())
                   : gaussian_information(traj.values[l], process.alpha * traj.values[l - 1], 1.0);
  return xi;
}

enum class Kind { Smb, Additive, Multiplicative };

ConvergenceReport running_statistic(Kind kind, const std::vector<double>& xi,
                                    const std::vector<double>& weight, double target,
                                    std::uint64_t seed) {
  const int n = static_cast<int>(xi.size());
  if (n < 1) throw ValidationError("empty trajectory");
  ConvergenceReport r;
  r.statistic = kind == Kind::Smb ? "smb" : kind == Kind::Additive ? "wi_additive" : "wi_multiplicative";
  r.target = target;
  r.seed = seed;
  r.we_rate = kNaN;
  r.checkpoints = geometric_checkpoints(n);

  double sum_xi = 0.0, sum_w = 0.0;
  std::size_t next = 0;
  for (int m = 1; m <= n && next < r.checkpoints.size(); ++m) {
    sum_xi += xi[m - 1];
    if (kind != Kind::Smb) sum_w += weight[m - 1];
    if (m != r.checkpoints[next]) continue;
    ++next;
    double est = kNaN;
    bool skip = false;
    switch (kind) {
      case Kind::Smb:
        est = sum_xi / m;
        break;
      case Kind::Additive:
        est = sum_w * sum_xi / (static_cast<double>(m) * m);
        break;
      case Kind::Multiplicative:
        if (sum_xi > 0.0) {
          const double info_term = std::log(sum_xi) / m;
          r.information_log_term.push_back(info_term);
          est = sum_w / m + info_term;
        } else {
          r.information_log_term.push_back(kNaN);
          skip = true;
        }
        break;
    }
    r.estimates.push_back(est);
    r.skipped.push_back(skip);
  }

  double last = kNaN;
  for (std::size_t i = r.estimates.size(); i-- > 0;)
    if (!r.skipped[i]) {
      last = r.estimates[i];
      break;
    }
  r.final_error = std::abs(last - target);

  const int B = std::min(kBatches, n);
  std::vector<double> stat(B);
  for (int b = 0; b < B; ++b) {
    const int lo = static_cast<int>(static_cast<long long>(n) * b / B);
    const int hi = static_cast<int>(static_cast<long long>(n) * (b + 1) / B);
    double sx = 0.0, sw = 0.0;
    for (int i = lo; i < hi; ++i) {
      sx += xi[i];
      if (kind != Kind::Smb) sw += weight[i];
    }
    const double len = hi - lo;
    stat[b] = kind == Kind::Smb ? sx / len : kind == Kind::Additive ? (sw / len) * (sx / len) : sw / len;
  }
  if (B >= 2) {
    double mean = 0.0;
    for (double s : stat) mean += s;
    mean /= B;
    double var = 0.0;
    for (double s : stat) var += (s - mean) * (s - mean);
    r.batch_se = std::sqrt(var / (B - 1) / B);
  }
  return r;
}

std::vector<double> symbol_weights(const Trajectory& traj, std::span<const double> phi, int k, bool log) {
  if (static_cast<int>(phi.size()) != k) throw ValidationError("weight length does not match the state count");
  std::vector<double> w(traj.symbols.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double v = phi[traj.symbols[i]];
    if (log && !(v > 0.0)) throw ValidationError("multiplicative WI needs phi > 0 on visited states");
    w[i] = log ? std::log(v) : v;
  }
  return w;
}

std::vector<double> value_weights(const Trajectory& traj, const NodeFunction& phi, bool log) {
  std::vector<double> w(traj.values.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double v = phi(traj.values[i]);
    if (log && !(v > 0.0)) throw ValidationError("multiplicative WI needs phi > 0 on visited states");
    w[i] = log ? std::log(v) : v;
  }
  return w;
}

double ar1_entropy_rate() { return 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e); }

}  // namespace

Trajectory simulate(const FiniteMarkovModel& model, int n, std::uint64_t seed) {
  if (n < 1) throw ValidationError("trajectory length must be >= 1");
  std::mt19937_64 rng(seed);
  Trajectory t;
  t.seed = seed;
  t.symbols.resize(n);
  t.symbols[0] = draw(rng, model.lambda().transpose());
  for (int l = 1; l < n; ++l) t.symbols[l] = draw(rng, model.P().row(t.symbols[l - 1]));
  return t;
}

Trajectory simulate(const AR1Process& process, int n, std::uint64_t seed) {
  if (n < 1) throw ValidationError("trajectory length must be >= 1");
  if (!(std::abs(process.alpha) < 1.0)) throw ValidationError("AR(1) needs |alpha| < 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Trajectory t;
  t.seed = seed;
  t.values.resize(n);
  t.values[0] = std::sqrt(process.stationary_variance()) * normal(rng);
  for (int l = 1; l < n; ++l) t.values[l] = process.alpha * t.values[l - 1] + normal(rng);
  return t;
}

std::vector<int> geometric_checkpoints(int n) {
  std::vector<int> out;
  for (long long m = 1; m <= n; m *= 2) out.push_back(static_cast<int>(m));
  if (out.empty() || out.back() != n) out.push_back(n);
  return out;
}

ConvergenceReport empirical_smb(const Trajectory& traj, const FiniteMarkovModel& model) {
  return running_statistic(Kind::Smb, step_information(traj, model), {}, entropy_rate(model), traj.seed);
}

ConvergenceReport empirical_smb(const Trajectory& traj, const AR1Process& process) {
  return running_statistic(Kind::Smb, step_information(traj, process), {}, ar1_entropy_rate(), traj.seed);
}

ConvergenceReport empirical_wi_additive(const Trajectory& traj, const FiniteMarkovModel& model,
                                        std::span<const double> phi) {
  const double target = stationary_mean(model, phi) * entropy_rate(model);
  return running_statistic(Kind::Additive, step_information(traj, model),
                           symbol_weights(traj, phi, model.state_count(), false), target, traj.seed);
}

ConvergenceReport empirical_wi_additive(const Trajectory& traj, const AR1Process& process,
                                        const NodeFunction& phi) {
  const double target = ar1_stationary_expectation(process, phi) * ar1_entropy_rate();
  return running_statistic(Kind::Additive, step_information(traj, process), value_weights(traj, phi, false),
                           target, traj.seed);
}

ConvergenceReport empirical_wi_multiplicative(const Trajectory& traj, const FiniteMarkovModel& model,
                                              std::span<const double> phi) {
  const std::vector<double> w = symbol_weights(traj, phi, model.state_count(), true);
  std::vector<double> logphi(phi.size());
  for (std::size_t i = 0; i < phi.size(); ++i) logphi[i] = phi[i] > 0.0 ? std::log(phi[i]) : 0.0;
  double target = 0.0;
  for (int x = 0; x < model.state_count(); ++x) {
    if (model.pi()(x) <= 0.0) continue;
    if (!(phi[x] > 0.0)) {
      target = -std::numeric_limits<double>::infinity();
      break;
    }
    target += model.pi()(x) * logphi[x];
  }
  ConvergenceReport r = running_statistic(Kind::Multiplicative, step_information(traj, model), w, target, traj.seed);
  try {
    r.we_rate = primary_rate_multiplicative(model, phi).B0;
  } catch (const Error&) {
    r.we_rate = kNaN;
  }
  return r;
}

ConvergenceReport empirical_wi_multiplicative(const Trajectory& traj, const AR1Process& process,
                                              const NodeFunction& phi) {
  const double target = ar1_stationary_expectation(process, [&](double x) { return std::log(phi(x)); });
  ConvergenceReport r = running_statistic(Kind::Multiplicative, step_information(traj, process),
                                          value_weights(traj, phi, true), target, traj.seed);
  try {
    r.we_rate = ar1_log_mu(process.alpha, phi);
  } catch (const Error&) {
    r.we_rate = kNaN;
  }
  return r;
}

double ar1_stationary_expectation(const AR1Process& process, const NodeFunction& g) {
  const double var = process.stationary_variance();
  const double half = 14.0 * std::sqrt(var);
  const Quadrature q = gauss_legendre(256, -half, half);
  double s = 0.0;
  for (int i = 0; i < q.size(); ++i) {
    const double x = q.nodes(i);
    s += q.weights(i) * g(x) * std::exp(-0.5 * x * x / var) / std::sqrt(2.0 * std::numbers::pi * var);
  }
  return s;
}

std::vector<ConvergenceReport> run_replicates(const std::vector<std::uint64_t>& seeds,
                                              const std::function<ConvergenceReport(std::uint64_t)>& run,
                                              int threads) {
  if (threads < 1) throw ValidationError("threads must be >= 1");
  std::vector<std::uint64_t> order = seeds;
  std::sort(order.begin(), order.end());
  std::vector<ConvergenceReport> out(order.size());
  const int T = std::min<int>(threads, static_cast<int>(order.size()));
  if (T <= 1) {
    for (std::size_t i = 0; i < order.size(); ++i) out[i] = run(order[i]);
    return out;
  }
  std::vector<std::exception_ptr> errors(T);
  std::vector<std::thread> pool;
  for (int w = 0; w < T; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < order.size(); i += T) out[i] = run(order[i]);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

ReplicateSummary summarize(const std::vector<ConvergenceReport>& reports) {
  if (reports.empty()) throw ValidationError("no reports to summarize");
  ReplicateSummary s;
  s.statistic = reports.front().statistic;
  s.target = reports.front().target;
  s.n = reports.front().checkpoints.back();
  for (const auto& r : reports) {
    s.seeds.push_back(r.seed);
    double last = kNaN;
    for (std::size_t i = r.estimates.size(); i-- > 0;)
      if (!r.skipped[i]) {
        last = r.estimates[i];
        break;
      }
    s.finals.push_back(last);
    s.max_abs_error = std::max(s.max_abs_error, std::abs(last - s.target));
  }
  const double k = static_cast<double>(s.finals.size());
  for (double f : s.finals) s.mean += f;
  s.mean /= k;
  if (s.finals.size() > 1) {
    double var = 0.0;
    for (double f : s.finals) var += (f - s.mean) * (f - s.mean);
    s.se = std::sqrt(var / (k - 1) / k);
  }
  s.max_relative_error = s.target != 0.0 ? s.max_abs_error / std::abs(s.target) : kNaN;
  return s;
}

void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceReport>& reports) {
  out << "seed,n_checkpoint,statistic,value,target,abs_error\n";
  out << std::setprecision(17);
  for (const auto& r : reports)
    for (std::size_t i = 0; i < r.checkpoints.size(); ++i) {
      out << r.seed << ',' << r.checkpoints[i] << ',' << r.statistic << ',';
      if (r.skipped[i]) {
        out << "nan," << r.target << ",nan\n";
      } else {
        out << r.estimates[i] << ',' << r.target << ',' << std::abs(r.estimates[i] - r.target) << '\n';
      }
    }
}

}  // namespace werate
