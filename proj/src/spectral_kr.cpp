#include "werate/spectral_kr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace werate {

Vector KernelOperator::apply(const Vector& f) const { return W * weights.cwiseProduct(f); }

Vector KernelOperator::apply_left(const Vector& g) const {
  return (weights.cwiseProduct(g).transpose() * W).transpose();
}

double KernelOperator::inner(const Vector& g, const Vector& f) const {
  return (g.cwiseProduct(f)).dot(weights);
}

KernelOperator build_weighted_kernel(const FiniteMarkovModel& model, std::span<const double> phi) {
  const int k = model.state_count();
  if (static_cast<int>(phi.size()) != k) throw ValidationError("phi must have one value per state");
  KernelOperator op;
  op.nodes = Vector::LinSpaced(k, 0.0, k - 1.0);
  op.weights = Vector::Ones(k);
  op.phi = Eigen::Map<const Vector>(phi.data(), k);
  if ((op.phi.array() < 0.0).any()) throw ValidationError("weighted kernel needs phi >= 0");
  op.transition = model.P();
  op.W = op.phi.asDiagonal() * model.P();
  return op;
}

KernelOperator kernel_from_matrix(Matrix W) {
  if (W.rows() != W.cols() || W.rows() == 0) throw ValidationError("kernel must be square");
  if ((W.array() < 0.0).any() || !W.allFinite())
    throw ValidationError("kernel entries must be finite and non-negative");
  KernelOperator op;
  const auto k = W.rows();
  op.nodes = Vector::LinSpaced(k, 0.0, k - 1.0);
  op.weights = Vector::Ones(k);
  op.W = std::move(W);
  return op;
}

KernelOperator build_weighted_kernel(const Quadrature& rule, const TransitionDensity& p,
                                     const NodeFunction& phi) {
  const int n = rule.size();
  KernelOperator op;
  op.nodes = rule.nodes;
  op.weights = rule.weights;
  op.phi.resize(n);
  op.transition.resize(n, n);
  for (int u = 0; u < n; ++u) {
    op.phi(u) = phi(rule.nodes(u));
    if (!(op.phi(u) >= 0.0) || !std::isfinite(op.phi(u)))
      throw ValidationError("weighted kernel needs finite phi >= 0");
    for (int v = 0; v < n; ++v) op.transition(u, v) = p(rule.nodes(u), rule.nodes(v));
  }
  op.W = op.phi.asDiagonal() * op.transition;
  return op;
}

KernelOperator geometric_rate_kernel(int N, const NodeFunction& phi) {
  if (N < 1) throw ValidationError("truncation level must be >= 1");
  Quadrature counting{Vector::LinSpaced(N + 1, 0.0, N), Vector::Ones(N + 1)};
  auto p = [](double x, double y) { return (1.0 - std::exp(-(x + 1.0))) * std::exp(-(x + 1.0) * y); };
  return build_weighted_kernel(counting, p, phi);
}

KernelOperator exponential_rate_kernel(double x_max, int nodes, const NodeFunction& phi) {
  auto p = [](double x, double y) { return (x + 1.0) * std::exp(-(x + 1.0) * y); };
  return build_weighted_kernel(gauss_legendre(nodes, 0.0, x_max), p, phi);
}

KernelOperator ar1_gaussian_kernel(double alpha, double x_max, int nodes, const NodeFunction& phi) {
  if (!(std::abs(alpha) < 1.0)) throw ValidationError("AR(1) needs |alpha| < 1");
  auto p = [alpha](double x, double y) {
    const double d = y - alpha * x;
    return std::exp(-0.5 * d * d) / std::sqrt(2.0 * std::numbers::pi);
  };
  return build_weighted_kernel(gauss_legendre(nodes, -x_max, x_max), p, phi);
}

namespace {

// Weights of the integral over [lo, t] of the piecewise-linear interpolant on
// the uniform grid, accumulated into `out`.
void add_lower_weights(double t, double lo, double h, int intervals, double sign, Vector& out) {
  if (t <= lo) return;
  const double pos = (t - lo) / h;
  int j = static_cast<int>(std::floor(pos));
  double tau = pos - j;
  if (j >= intervals) {
    j = intervals;
    tau = 0.0;
  }
  for (int m = 0; m < j; ++m) {
    out(m) += sign * 0.5 * h;
    out(m + 1) += sign * 0.5 * h;
  }
  if (tau > 0.0) {
    out(j) += sign * h * (tau - 0.5 * tau * tau);
    out(j + 1) += sign * h * 0.5 * tau * tau;
  }
}

}  // namespace

Matrix separation_weights(double a, const Quadrature& grid) {
  if (a < 0.0) throw ValidationError("separation a must be >= 0");
  const int n = grid.size();
  if (n < 2) throw ValidationError("grid needs at least two nodes");
  const int intervals = n - 1;
  const double lo = grid.nodes(0);
  const double h = grid.nodes(1) - grid.nodes(0);
  Matrix omega(n, n);
  for (int i = 0; i < n; ++i) {
    const double x = grid.nodes(i);
    Vector row = grid.weights;  // whole line, minus [lo, x + a], plus [lo, x - a]
    add_lower_weights(x + a, lo, h, intervals, -1.0, row);
    add_lower_weights(x - a, lo, h, intervals, +1.0, row);
    omega.row(i) = row.cwiseMax(0.0).transpose();
  }
  return omega;
}

KernelOperator indicator_kernel(double a, double lo, double hi, int intervals,
                                const NodeFunction& chi) {
  const Quadrature grid = trapezoid(intervals, lo, hi);
  KernelOperator op;
  op.nodes = grid.nodes;
  op.weights = grid.weights;
  op.W = separation_weights(a, grid);
  for (int i = 0; i < grid.size(); ++i) op.W.row(i) *= std::exp(chi(grid.nodes(i)));
  op.W = op.W * grid.weights.cwiseInverse().asDiagonal();
  return op;
}

Vector ar1_stationary_density(const KernelOperator& op, double alpha) {
  const double c = 1.0 / (1.0 - alpha * alpha);
  Vector d(op.size());
  for (int i = 0; i < op.size(); ++i)
    d(i) = std::exp(-0.5 * op.nodes(i) * op.nodes(i) / c) / std::sqrt(2.0 * std::numbers::pi * c);
  return d / d.dot(op.weights);
}

Vector exponential_rate_density(const KernelOperator& op) {
  Vector d(op.size());
  for (int i = 0; i < op.size(); ++i) d(i) = std::exp(-op.nodes(i)) / (op.nodes(i) + 1.0);
  return d / d.dot(op.weights);
}

std::optional<int> check_doeblin(const KernelOperator& op, int k_max) {
  if (k_max < 0) throw ValidationError("k_max must be >= 0");
  const Matrix A = op.W * op.weights.asDiagonal();
  Matrix power = A;
  for (int j = 0; j <= k_max; ++j) {
    if ((power.array() > 0.0).all()) return j;
    if (j < k_max) power = power * A;
  }
  return std::nullopt;
}

HSReport hilbert_schmidt_check(const KernelOperator& op) {
  const Matrix A = op.weights.asDiagonal() * op.W * op.weights.asDiagonal();
  const double v = (op.W.array() * A.transpose().array()).sum();
  // sum_{x,y} W(x,y) W(y,x) w_x w_y, the transpose pairs (x,y) with (y,x)
  return {v, std::isfinite(v)};
}

HSReport hilbert_schmidt_under_refinement(const std::function<KernelOperator(int)>& build,
                                          int nodes0, int levels) {
  HSReport last{};
  double prev_change = std::numeric_limits<double>::infinity();
  bool settling = true;
  double prev = 0.0;
  for (int lvl = 0, n = nodes0; lvl < levels; ++lvl, n *= 2) {
    last = hilbert_schmidt_check(build(n));
    if (!last.finite) return last;
    if (lvl > 0) {
      const double change = std::abs(last.hs_value - prev);
      if (lvl > 1 && change > prev_change && change > 1e-12 * std::abs(last.hs_value))
        settling = false;
      prev_change = change;
    }
    prev = last.hs_value;
  }
  last.finite = settling;
  return last;
}

namespace {

struct PowerOutcome {
  Vector v;
  double gap = 1.0;
  int iterations = 0;
};

template <class Step>
PowerOutcome power_iterate(const KernelOperator& op, Step step, double tol, int max_iter,
                           const char* side) {
  Vector v = Vector::Ones(op.size());
  v /= op.norm(v);
  double d_prev = -1.0;
  double d_best = std::numeric_limits<double>::infinity();
  int since_best = 0;
  std::vector<double> ratios;
  for (int it = 1; it <= max_iter; ++it) {
    Vector y = step(v);
    const double ny = op.norm(y);
    if (!(ny > 0.0) || !std::isfinite(ny))
      throw NumericError(std::string("power iteration produced a zero iterate (") + side + ")");
    y /= ny;
    const double d = op.norm(y - v);
    if (d_prev > 1e-10) ratios.push_back(d / d_prev);
    v.swap(y);
    d_prev = d;
    if (d < d_best * 0.999) {
      d_best = d;
      since_best = 0;
    } else {
      ++since_best;
    }
    const bool stalled = d < 1e-10 && since_best > 200;
    if (d <= tol || stalled) {
      PowerOutcome out{std::move(v), 1.0, it};
      if (!ratios.empty()) {
        const std::size_t take = std::min<std::size_t>(ratios.size(), 9);
        std::vector<double> tail(ratios.end() - take, ratios.end());
        std::nth_element(tail.begin(), tail.begin() + take / 2, tail.end());
        out.gap = std::clamp(1.0 - tail[take / 2], std::numeric_limits<double>::min(), 1.0);
      }
      return out;
    }
  }
  throw NumericError(std::string("power iteration did not converge within max_iter (") + side +
                     ")");
}

}  // namespace

KreinRutmanResult krein_rutman(const KernelOperator& op, double tol, int max_iter) {
  if (op.size() == 0) throw ValidationError("empty kernel");
  auto right = power_iterate(op, [&](const Vector& v) { return op.apply(v); }, tol, max_iter, "right");
  auto left =
      power_iterate(op, [&](const Vector& v) { return op.apply_left(v); }, tol, max_iter, "left");
  KreinRutmanResult r;
  r.phi_right = std::move(right.v);
  r.psi_left = std::move(left.v);
  const double pairing = op.inner(r.psi_left, r.phi_right);
  if (!(pairing > 0.0)) throw NumericError("left and right eigenfunctions are orthogonal");
  r.psi_left /= pairing;
  const Vector Wphi = op.apply(r.phi_right);
  r.mu = op.inner(r.psi_left, Wphi);
  r.residual_right = op.norm(Wphi - r.mu * r.phi_right);
  r.residual_left = op.norm(op.apply_left(r.psi_left) - r.mu * r.psi_left);
  r.gap_estimate = right.gap;
  r.iterations = std::max(right.iterations, left.iterations);
  return r;
}

double operator_norm(const KernelOperator& op, double tol, int max_iter) {
  const Vector sw = op.weights.cwiseSqrt();
  const Matrix B = sw.asDiagonal() * op.W * sw.asDiagonal();
  Vector v = Vector::Ones(op.size()).normalized();
  double sigma2 = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Vector y = B.transpose() * (B * v);
    const double ny = y.norm();
    if (ny == 0.0) return 0.0;
    y /= ny;
    const double d = (y - v).norm();
    v.swap(y);
    sigma2 = ny;
    if (d <= tol) break;
  }
  return std::sqrt(sigma2);
}

namespace {

ConditionReport check_conditions(const KernelOperator& op, const Vector* initial, int k_max) {
  ConditionReport c;
  c.doeblin_k = check_doeblin(op, k_max);
  c.hilbert_schmidt = hilbert_schmidt_check(op);
  if (op.has_factors()) {
    double m = 0.0;
    for (Eigen::Index i = 0; i < op.transition.size(); ++i) {
      const double p = op.transition.data()[i];
      if (p > 0.0) m = std::max(m, std::abs(p * std::log(p)));
    }
    c.bounded_plogp = std::isfinite(m);
    double l2 = op.inner(op.phi, op.phi);
    if (initial) {
      Vector ll = initial->unaryExpr([](double x) { return x > 0.0 ? x * std::log(x) : 0.0; });
      l2 += op.inner(ll, ll);
    }
    c.l2_weights = std::isfinite(l2);
  }
  return c;
}

MultiplicativeRateReport rate_from(const KernelOperator& op, ConditionReport conditions) {
  if (!conditions.doeblin_k)
    throw ValidationError("Doeblin positivity fails: no iterated kernel is strictly positive");
  MultiplicativeRateReport r;
  r.conditions = std::move(conditions);
  r.kr = krein_rutman(op);
  r.mu = r.kr.mu;
  r.B0 = std::log(r.mu);
  r.norm = operator_norm(op);
  return r;
}

}  // namespace

MultiplicativeRateReport primary_rate_multiplicative(const FiniteMarkovModel& model,
                                                     std::span<const double> phi,
                                                     int doeblin_k_max) {
  const auto op = build_weighted_kernel(model, phi);
  const int k = model.state_count();
  if (doeblin_k_max < 0) doeblin_k_max = (k - 1) * (k - 1) + 1;
  return rate_from(op, check_conditions(op, &model.lambda(), doeblin_k_max));
}

MultiplicativeRateReport primary_rate_multiplicative(const KernelOperator& op, int doeblin_k_max) {
  return rate_from(op, check_conditions(op, nullptr, doeblin_k_max));
}

LogScaled exact_joint_we_multiplicative(const KernelOperator& op, const Vector& initial, int n,
                                        bool boundary_term) {
  if (n < 2) throw ValidationError("multiplicative WE needs n >= 2");
  if (!op.has_factors()) throw ValidationError("kernel carries no phi / transition factors");
  const int N = op.size();
  if (initial.size() != N) throw ValidationError("initial law has the wrong length");

  auto normalize = [](Vector& v) {
    const double s = v.cwiseAbs().maxCoeff();
    if (!(s > 0.0)) return 0.0;  // all-zero vector keeps scale 0
    v /= s;
    return std::log(s);
  };

  // R[m] = W^m phi up to exp(Rs[m]).
  std::vector<Vector> R(n);
  std::vector<double> Rs(n);
  R[0] = op.phi;
  Rs[0] = normalize(R[0]);
  for (int m = 1; m < n; ++m) {
    R[m] = op.apply(R[m - 1]);
    Rs[m] = Rs[m - 1] + normalize(R[m]);
  }

  Matrix G = Matrix::Zero(N, N);  // W(x,y) ln p(y|x)
  for (int x = 0; x < N; ++x)
    for (int y = 0; y < N; ++y) {
      const double p = op.transition(x, y);
      if (p > 0.0 && op.W(x, y) != 0.0) G(x, y) = op.W(x, y) * std::log(p);
    }

  std::vector<double> mant, expo;
  mant.reserve(n);
  expo.reserve(n);
  if (boundary_term) {
    Vector ll = initial.unaryExpr([](double x) { return x > 0.0 ? x * std::log(x) : 0.0; });
    mant.push_back(-op.inner(ll, R[n - 1]));
    expo.push_back(Rs[n - 1]);
  }
  Vector L = initial;
  double Ls = normalize(L);
  for (int l = 1; l < n; ++l) {
    const Vector Gr = G * op.weights.cwiseProduct(R[n - 1 - l]);
    mant.push_back(-op.inner(L, Gr));
    expo.push_back(Ls + Rs[n - 1 - l]);
    if (l + 1 < n) {
      L = op.apply_left(L);
      Ls += normalize(L);
    }
  }
  const double top = *std::max_element(expo.begin(), expo.end());
  double total = 0.0;
  for (std::size_t i = 0; i < mant.size(); ++i) total += mant[i] * std::exp(expo[i] - top);
  return {total, top};
}

LogScaled exact_joint_we_multiplicative(const FiniteMarkovModel& model, std::span<const double> phi,
                                        int n, Start start) {
  const auto op = build_weighted_kernel(model, phi);
  const Vector& init = start == Start::Stationary ? model.pi() : model.lambda();
  return exact_joint_we_multiplicative(op, init, n, start != Start::InitialConditional);
}

SecondaryMultiplicativeResult secondary_rate_multiplicative(const KernelOperator& op,
                                                            const KreinRutmanResult& kr,
                                                            const Vector& stationary) {
  if (!op.has_factors()) throw ValidationError("kernel carries no phi / transition factors");
  const int N = op.size();
  const Vector& Phi = kr.phi_right;
  const Vector& Psi = kr.psi_left;
  double forward = 0.0, swapped = 0.0;
  for (int x = 0; x < N; ++x)
    for (int y = 0; y < N; ++y) {
      const double p = op.transition(x, y);
      if (!(p > 0.0) || op.W(x, y) == 0.0) continue;
      const double g = op.W(x, y) * std::log(p) * op.weights(x) * op.weights(y);
      forward += Psi(x) * Phi(y) * g;
      swapped += Phi(x) * Psi(y) * g;
    }
  const double pref = -op.inner(Psi, op.phi) * op.inner(Phi, stationary) / (kr.mu * kr.mu);
  return {pref * forward, pref * swapped};
}

SecondaryMultiplicativeResult secondary_rate_multiplicative(const FiniteMarkovModel& model,
                                                            std::span<const double> phi) {
  const auto op = build_weighted_kernel(model, phi);
  const auto kr = krein_rutman(op);
  return secondary_rate_multiplicative(op, kr, model.pi());
}

RefinementResult refine_perron(const std::function<KernelOperator(int)>& build, int size0,
                               double tol, int max_size, int richardson_order) {
  RefinementResult out;
  std::vector<std::vector<double>> table;  // Richardson tableau, row per level
  double prev_best = std::numeric_limits<double>::quiet_NaN();
  for (int size = size0; size <= max_size; size *= 2) {
    const double mu = krein_rutman(build(size)).mu;
    out.sizes.push_back(size);
    out.mu.push_back(mu);
    std::vector<double> row{mu};
    if (richardson_order > 0) {
      const std::size_t i = table.size();
      for (std::size_t j = 1; j <= std::min<std::size_t>(i, 2); ++j) {
        const double f = std::pow(2.0, richardson_order * static_cast<double>(j));
        row.push_back(row[j - 1] + (row[j - 1] - table[i - 1][j - 1]) / (f - 1.0));
      }
    }
    table.push_back(row);
    const double best = row.back();
    out.mu_best = best;
    if (std::isfinite(prev_best) && std::abs(best - prev_best) < tol) {
      out.converged = true;
      break;
    }
    prev_best = best;
    if (size > max_size / 2) break;
  }
  return out;
}

}  // namespace werate
