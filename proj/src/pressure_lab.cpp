#include "werate/pressure_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "werate/model_core.hpp"

namespace werate {

namespace {

Vector to_vector(std::span<const double> phi, int states) {
  if (static_cast<int>(phi.size()) != states)
    throw ValidationError("weight length does not match the state count");
  Vector v(states);
  for (int i = 0; i < states; ++i) {
    if (!(phi[i] >= 0.0)) throw ValidationError("multiplicative weight must be nonnegative");
    v(i) = phi[i];
  }
  return v;
}

Matrix weighted_matrix(const FiniteMarkovModel& model, const Vector& phi) {
  return phi.asDiagonal() * model.P();
}

// Rescales v to unit max-norm and returns the log of the removed factor.
double renormalize(Vector& v) {
  const double m = v.cwiseAbs().maxCoeff();
  if (!(m > 0.0)) throw NumericError("partition recursion collapsed to zero");
  v /= m;
  return std::log(m);
}

double log_normal_density(double x) {
  return -0.5 * x * x - 0.5 * std::log(2.0 * std::numbers::pi);
}

std::vector<double> string_law(const FiniteMarkovModel& Q, int n) {
  const int k = Q.state_count();
  const std::uint64_t count = guarded_string_count(static_cast<std::size_t>(k), n);
  std::vector<double> out(count);
  std::vector<int> word(n);
  for (std::uint64_t idx = 0; idx < count; ++idx) {
    decode_word(idx, static_cast<std::size_t>(k), word);
    double p = Q.pi()(word[0]);
    for (int j = 1; j < n && p > 0.0; ++j) p *= Q.P()(word[j - 1], word[j]);
    out[idx] = p;
  }
  return out;
}

KernelOperator pressure_kernel(const NodeFunction& chi, double a, const TopoDomain& domain,
                               int intervals) {
  if (domain.reference == TopoDomain::Reference::StandardNormal) {
    return indicator_kernel(a, domain.lo, domain.hi, intervals,
                            [&](double x) { return chi(x) + log_normal_density(x); });
  }
  return indicator_kernel(a, domain.lo, domain.hi, intervals, chi);
}

int aligned_start(double a, const TopoDomain& domain) {
  // Smallest power of two, at least 64, putting x +- a on grid nodes when possible.
  const double width = domain.hi - domain.lo;
  for (int m = 64; m <= 1024; m *= 2) {
    const double r = a * m / width;
    if (std::abs(r - std::round(r)) < 1e-12) return m;
  }
  return 64;
}

}  // namespace

LogScaled partition_function(const FiniteMarkovModel& model, std::span<const double> phi, int n) {
  if (n < 1) throw ValidationError("n must be >= 1");
  const Vector f = to_vector(phi, model.state_count());
  const Matrix W = weighted_matrix(model, f);
  Vector v = f;
  double log_scale = 0.0;
  if (v.cwiseAbs().maxCoeff() == 0.0) return {0.0, 0.0};
  log_scale += renormalize(v);
  for (int m = 1; m < n; ++m) {
    v = W * v;
    log_scale += renormalize(v);
  }
  return {model.pi().dot(v), log_scale};
}

PressureSeries pressure_estimate(const FiniteMarkovModel& model, std::span<const double> phi,
                                 int n_max) {
  if (n_max < 2) throw ValidationError("n_max must be >= 2");
  const Vector f = to_vector(phi, model.state_count());
  const Matrix W = weighted_matrix(model, f);
  PressureSeries out;
  Vector v = f;
  double log_scale = renormalize(v);
  double prev = std::log(model.pi().dot(v)) + log_scale;
  for (int n = 2; n <= n_max; ++n) {
    v = W * v;
    log_scale += renormalize(v);
    const double cur = std::log(model.pi().dot(v)) + log_scale;
    out.n.push_back(n);
    out.cesaro.push_back(cur / n);
    out.slope.push_back(cur - prev);
    prev = cur;
  }
  return out;
}

std::vector<double> tilted_pmf(const FiniteMarkovModel& model, std::span<const double> phi, int n) {
  const int k = model.state_count();
  const Vector f = to_vector(phi, k);
  const Matrix W = weighted_matrix(model, f);
  const double xi = partition_function(model, phi, n).value();
  if (!(xi > 0.0) || !std::isfinite(xi)) throw NumericError("partition function not positive and finite");
  const std::uint64_t count = guarded_string_count(static_cast<std::size_t>(k), n);
  std::vector<double> out(count);
  std::vector<int> word(n);
  for (std::uint64_t idx = 0; idx < count; ++idx) {
    decode_word(idx, static_cast<std::size_t>(k), word);
    double p = model.pi()(word[0]);
    for (int j = 1; j < n && p > 0.0; ++j) p *= W(word[j - 1], word[j]);
    out[idx] = p * f(word[n - 1]) / xi;
  }
  return out;
}

double TwistedChain::row_sum_defect() const {
  return (P.rowwise().sum().array() - 1.0).abs().maxCoeff();
}

double TwistedChain::stationarity_defect() const {
  return (P.transpose() * pi - pi).cwiseAbs().maxCoeff();
}

TwistedChain twist(const FiniteMarkovModel& model, std::span<const double> phi,
                   const KreinRutmanResult& kr) {
  const int k = model.state_count();
  const Vector f = to_vector(phi, k);
  const Matrix W = weighted_matrix(model, f);
  if (kr.phi_right.size() != k || kr.psi_left.size() != k)
    throw ValidationError("eigen-data size does not match the chain");
  if ((kr.phi_right.array() <= 0.0).any())
    throw NumericError("right eigenvector must be strictly positive to twist");
  TwistedChain out;
  out.P.resize(k, k);
  for (int x = 0; x < k; ++x)
    for (int y = 0; y < k; ++y)
      out.P(x, y) = W(x, y) * kr.phi_right(y) / (kr.mu * kr.phi_right(x));
  out.pi = kr.psi_left.cwiseProduct(kr.phi_right);
  return out;
}

VariationalAudit variational_audit(const FiniteMarkovModel& Q, const FiniteMarkovModel& model,
                                   std::span<const double> phi, const KreinRutmanResult& kr) {
  const int k = model.state_count();
  if (Q.state_count() != k) throw ValidationError("candidate chain has the wrong state count");
  const Vector f = to_vector(phi, k);
  const Matrix W = weighted_matrix(model, f);
  VariationalAudit out;
  out.h_Q = entropy_rate(Q);
  double L = 0.0;
  for (int x = 0; x < k; ++x) {
    for (int y = 0; y < k; ++y) {
      const double q = Q.P()(x, y);
      if (q <= 0.0 || Q.pi()(x) <= 0.0) continue;
      if (W(x, y) <= 0.0) {
        out.applicable = false;
        out.L_Q = -std::numeric_limits<double>::infinity();
        out.slack = std::numeric_limits<double>::infinity();
        return out;
      }
      L += Q.pi()(x) * q * std::log(W(x, y));
    }
  }
  out.L_Q = L;
  out.slack = std::log(kr.mu) - out.h_Q - out.L_Q;
  return out;
}

AuditReport randomized_audit(const FiniteMarkovModel& model, std::span<const double> phi,
                             int count, std::uint64_t seed, double concentration) {
  if (count < 0) throw ValidationError("candidate count must be >= 0");
  if (!(concentration > 0.0)) throw ValidationError("concentration must be positive");
  const MultiplicativeRateReport rate = primary_rate_multiplicative(model, phi);
  const TwistedChain tw = twist(model, phi, rate.kr);
  const int k = model.state_count();

  AuditReport out;
  out.mu = rate.mu;
  out.B0 = rate.B0;
  out.equality_witness_residual = std::abs(variational_audit(tw.model(), model, phi, rate.kr).slack);
  out.min_slack = std::numeric_limits<double>::infinity();

  std::mt19937_64 rng(seed);
  Matrix Q(k, k);
  for (int c = 0; c < count; ++c) {
    for (int x = 0; x < k; ++x) {
      double total = 0.0;
      for (int y = 0; y < k; ++y) {
        const double base = tw.P(x, y);
        double draw = 0.0;
        if (base > 0.0) {
          std::gamma_distribution<double> gamma(1.0 + concentration * base, 1.0);
          draw = gamma(rng);
        }
        Q(x, y) = draw;
        total += draw;
      }
      if (!(total > 0.0)) Q.row(x) = tw.P.row(x);
      else Q.row(x) /= total;
    }
    const FiniteMarkovModel candidate(Q);
    out.candidates.push_back(variational_audit(candidate, model, phi, rate.kr));
    out.min_slack = std::min(out.min_slack, out.candidates.back().slack);
  }
  return out;
}

double twisted_tilted_kl(const FiniteMarkovModel& model, std::span<const double> phi,
                         const KreinRutmanResult& kr, int n) {
  if (n < 1) throw ValidationError("n must be >= 1");
  const int k = model.state_count();
  const Vector f = to_vector(phi, k);
  const Vector pt = kr.psi_left.cwiseProduct(kr.phi_right);
  double boundary = 0.0;
  for (int x = 0; x < k; ++x) {
    if (pt(x) <= 0.0) continue;
    if (model.pi()(x) <= 0.0 || f(x) <= 0.0) return std::numeric_limits<double>::infinity();
    boundary += pt(x) * (std::log(kr.psi_left(x)) - std::log(model.pi()(x)) +
                         std::log(kr.phi_right(x)) - std::log(f(x)));
  }
  return partition_function(model, phi, n).log_abs() - (n - 1) * std::log(kr.mu) + boundary;
}

double gibbs_gap_enumerated(const FiniteMarkovModel& Q, const FiniteMarkovModel& model,
                            std::span<const double> phi, int n) {
  if (Q.state_count() != model.state_count())
    throw ValidationError("candidate chain has the wrong state count");
  const std::vector<double> q = string_law(Q, n);
  const std::vector<double> t = tilted_pmf(model, phi, n);
  double gap = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] <= 0.0) continue;
    if (t[i] <= 0.0) return std::numeric_limits<double>::infinity();
    gap += q[i] * (std::log(q[i]) - std::log(t[i]));
  }
  return gap;
}

TopologicalResult topological_pressure(const NodeFunction& chi, double a, const TopoDomain& domain,
                                       double tol) {
  if (!(domain.hi > domain.lo)) throw ValidationError("domain must have hi > lo");
  if (a < 0.0) throw ValidationError("separation a must be >= 0");
  TopologicalResult out;
  const int start = aligned_start(a, domain);
  out.refinement = refine_perron(
      [&](int m) { return pressure_kernel(chi, a, domain, m); }, start, tol, 4096, 2);
  out.log_mu = std::log(out.refinement.mu_best);
  return out;
}

TopologicalResult topological_entropy(double a, const TopoDomain& domain, double tol) {
  return topological_pressure([](double) { return 0.0; }, a, domain, tol);
}

DirectVolume topological_entropy_direct(double a, int n, const TopoDomain& domain) {
  if (n < 2) throw ValidationError("n must be >= 2");
  if (!(domain.hi > domain.lo)) throw ValidationError("domain must have hi > lo");
  const Quadrature grid = trapezoid(domain.intervals, domain.lo, domain.hi);
  const Matrix omega = separation_weights(a, grid);
  Vector rho(grid.size());
  for (int i = 0; i < grid.size(); ++i)
    rho(i) = domain.reference == TopoDomain::Reference::StandardNormal
                 ? std::exp(log_normal_density(grid.nodes(i)))
                 : 1.0;
  const Vector wr = grid.weights.cwiseProduct(rho);

  DirectVolume out;
  Vector v = Vector::Ones(grid.size());
  double log_scale = 0.0;
  out.log_volume.push_back(std::log(wr.dot(v)));
  for (int m = 2; m <= n; ++m) {
    v = omega * rho.cwiseProduct(v);
    log_scale += renormalize(v);
    out.log_volume.push_back(std::log(wr.dot(v)) + log_scale);
  }
  out.cesaro = out.log_volume.back() / n;
  out.step_growth = out.log_volume[n - 1] - out.log_volume[n - 2];
  return out;
}

}  // namespace werate
