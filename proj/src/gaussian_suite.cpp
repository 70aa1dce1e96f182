#include "werate/gaussian_suite.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <thread>
#include <vector>

namespace werate {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // ln(2 pi)

void require_square(const Matrix& A, int n, const char* what) {
  if (A.rows() != n || A.cols() != n) throw ValidationError(std::string(what) + " has the wrong shape");
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, A.cwiseAbs().maxCoeff()))
    throw ValidationError(std::string(what) + " must be symmetric");
}

}  // namespace

GaussianModel GaussianModel::from_covariance(Matrix C) {
  if (C.rows() == 0) throw ValidationError("covariance must be non-empty");
  require_square(C, static_cast<int>(C.rows()), "covariance");
  GaussianModel m;
  m.C_ = 0.5 * (C + C.transpose());
  m.factorize();
  m.precision_ = m.C_.llt().solve(Matrix::Identity(m.C_.rows(), m.C_.cols()));
  return m;
}

GaussianModel GaussianModel::ar1(double alpha, int n) {
  if (!(std::abs(alpha) < 1.0)) throw ValidationError("AR(1) needs |alpha| < 1");
  if (n < 1) throw ValidationError("AR(1) block needs n >= 1");
  GaussianModel m;
  m.alpha_ = alpha;
  const double c0 = 1.0 / (1.0 - alpha * alpha);
  m.C_.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m.C_(i, j) = c0 * std::pow(alpha, std::abs(i - j));
  m.precision_ = Matrix::Zero(n, n);
  if (n == 1) {
    m.precision_(0, 0) = 1.0 - alpha * alpha;
  } else {
    for (int i = 0; i < n; ++i) m.precision_(i, i) = (i == 0 || i == n - 1) ? 1.0 : 1.0 + alpha * alpha;
    for (int i = 0; i + 1 < n; ++i) m.precision_(i, i + 1) = m.precision_(i + 1, i) = -alpha;
  }
  m.factorize();
  return m;
}

void GaussianModel::factorize() {
  Eigen::LLT<Matrix> llt(C_);
  if (llt.info() != Eigen::Success) throw ValidationError("covariance is not positive definite");
  L_ = llt.matrixL();
  log_det_ = 2.0 * L_.diagonal().array().log().sum();
  if (!std::isfinite(log_det_)) throw ValidationError("covariance is not positive definite");
}

double GaussianModel::quadratic_form(const Vector& x) const {
  if (x.size() != dimension()) throw ValidationError("point has the wrong dimension");
  const Vector z = L_.triangularView<Eigen::Lower>().solve(x);
  return z.squaredNorm();
}

double GaussianModel::information(const Vector& x) const {
  return 0.5 * (dimension() * kLog2Pi + log_det_ + quadratic_form(x));
}

double ar1_precision_determinant(double alpha, int n) {
  if (!(std::abs(alpha) < 1.0)) throw ValidationError("AR(1) needs |alpha| < 1");
  if (n < 1) throw ValidationError("n must be >= 1");
  const double a2 = alpha * alpha;
  if (n == 1) return 1.0 - a2;
  double prev = 1.0;  // D_0
  double cur = 1.0;   // D_1
  for (int k = 2; k <= n; ++k) {
    const double d = (k == n) ? 1.0 : 1.0 + a2;
    const double next = d * cur - a2 * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double gaussian_entropy(const GaussianModel& model) {
  return 0.5 * (model.dimension() * (kLog2Pi + 1.0) + model.log_det_covariance());
}

GaussianWFSpec GaussianWFSpec::constant_times_n(double alpha) {
  GaussianWFSpec s;
  s.kind = Kind::ConstantTimesN;
  s.alpha = alpha;
  return s;
}

GaussianWFSpec GaussianWFSpec::quadratic(Matrix A) {
  GaussianWFSpec s;
  s.kind = Kind::Quadratic;
  s.A = std::move(A);
  return s;
}

GaussianWFSpec GaussianWFSpec::exp_quadratic(Matrix A, Vector t) {
  GaussianWFSpec s;
  s.kind = Kind::ExpQuadratic;
  s.A = std::move(A);
  s.t = std::move(t);
  return s;
}

GaussianWFSpec GaussianWFSpec::exp_linear(Vector t) {
  GaussianWFSpec s;
  s.kind = Kind::ExpLinear;
  s.t = std::move(t);
  return s;
}

double GaussianWFSpec::operator()(const GaussianModel& model, const Vector& x) const {
  const int n = model.dimension();
  switch (kind) {
    case Kind::ConstantTimesN:
      return alpha * n;
    case Kind::Quadratic:
      return x.dot(A * x);
    case Kind::ExpQuadratic:
      return std::exp(x.dot((model.precision() - A) * t) + 0.5 * x.dot(A * x));
    case Kind::ExpLinear:
      return std::exp(x.dot(model.precision() * t));
  }
  return 0.0;
}

double we_constant_wf(const GaussianModel& model, double alpha) {
  return alpha * model.dimension() * gaussian_entropy(model);
}

AdditiveMoments polynomial_moments(const GaussianModel& model, double c0, const Vector& b,
                                   const Matrix& A) {
  const int n = model.dimension();
  if (b.size() != 0 && b.size() != n) throw ValidationError("linear coefficient has the wrong length");
  require_square(A, n, "quadratic coefficient");
  const double trAC = (A * model.covariance()).trace();
  // E[(Z^T M Z)(Z^T A Z)] = tr(MC) tr(AC) + 2 tr(MCAC) with M = C^{-1}; odd moments vanish.
  return {c0 + trAC, c0 * n + n * trAC + 2.0 * trAC};
}

AdditiveMoments quadratic_moments(const GaussianModel& model, const Matrix& A) {
  return polynomial_moments(model, 0.0, Vector(), A);
}

double we_additive_gaussian(const GaussianModel& model, const AdditiveMoments& moments) {
  const double H = gaussian_entropy(model);
  return (H - 0.5 * model.dimension()) * moments.E_phi + 0.5 * moments.E_Qphi;
}

QuadraticWF we_quadratic_wf(const GaussianModel& model, const Matrix& A) {
  const int n = model.dimension();
  require_square(A, n, "quadratic weight matrix");
  QuadraticWF out;
  out.entropy = gaussian_entropy(model);
  out.wi_offset = out.entropy - 0.5 * n;
  const Matrix AC = A * model.covariance();
  out.trace_AC = AC.trace();
  out.trace_ACAC = (AC * AC).trace();
  out.moments = quadratic_moments(model, A);
  out.we = we_additive_gaussian(model, out.moments);
  return out;
}

ExpQuadraticWF we_exp_quadratic(const GaussianModel& model, const Matrix& A, const Vector& t) {
  const int n = model.dimension();
  require_square(A, n, "exponent matrix");
  if (t.size() != n) throw ValidationError("shift has the wrong length");
  const Matrix M = model.precision() - A;
  Eigen::LLT<Matrix> llt(0.5 * (M + M.transpose()));
  if (llt.info() != Eigen::Success) throw ValidationError("C^{-1} - A must be positive definite");
  const Matrix LM = llt.matrixL();
  const double log_det_M = 2.0 * LM.diagonal().array().log().sum();
  if (!std::isfinite(log_det_M)) throw ValidationError("C^{-1} - A must be positive definite");
  // det(I - C A) = det(C) det(M)
  const double log_det_I_CA = model.log_det_covariance() + log_det_M;
  const Matrix Minv = llt.solve(Matrix::Identity(n, n));

  ExpQuadraticWF out;
  out.log_E_phi = 0.5 * t.dot(M * t) - 0.5 * log_det_I_CA;
  out.E_phi = std::exp(out.log_E_phi);
  out.trace_term = (model.precision() * Minv).trace();
  out.shift_term = t.dot(model.precision() * t);
  out.we = out.E_phi * (gaussian_entropy(model) - 0.5 * n + 0.5 * out.trace_term + 0.5 * out.shift_term);
  return out;
}

double we_closed_form(const GaussianModel& model, const GaussianWFSpec& wf) {
  switch (wf.kind) {
    case GaussianWFSpec::Kind::ConstantTimesN:
      return we_constant_wf(model, wf.alpha);
    case GaussianWFSpec::Kind::Quadratic:
      return we_quadratic_wf(model, wf.A).we;
    case GaussianWFSpec::Kind::ExpQuadratic:
      return we_exp_quadratic(model, wf.A, wf.t).we;
    case GaussianWFSpec::Kind::ExpLinear:
      return we_exp_quadratic(model, Matrix::Zero(model.dimension(), model.dimension()), wf.t).we;
  }
  return 0.0;
}

void MCOracleConfig::validate() const {
  if (samples < 10'000) throw ValidationError("Monte Carlo oracle needs at least 1e4 samples");
  if (batches < 2) throw ValidationError("Monte Carlo oracle needs at least 2 batches");
  if (static_cast<std::uint64_t>(batches) > samples) throw ValidationError("more batches than samples");
  if (threads < 1) throw ValidationError("threads must be >= 1");
}

MCEstimate mc_expectation(const GaussianModel& model,
                          const std::function<double(const Vector& x, double information)>& g,
                          const MCOracleConfig& config) {
  config.validate();
  const int n = model.dimension();
  const int B = config.batches;
  const double base_info = 0.5 * (n * kLog2Pi + model.log_det_covariance());
  std::vector<double> batch_mean(B, 0.0);

  auto run_batch = [&](int b) {
    const std::uint64_t lo = config.samples * static_cast<std::uint64_t>(b) / B;
    const std::uint64_t hi = config.samples * static_cast<std::uint64_t>(b + 1) / B;
    std::seed_seq seq{static_cast<std::uint32_t>(config.seed), static_cast<std::uint32_t>(config.seed >> 32),
                      static_cast<std::uint32_t>(b)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal;
    Vector z(n), x(n);
    double sum = 0.0;
    for (std::uint64_t s = lo; s < hi; ++s) {
      for (int i = 0; i < n; ++i) z(i) = normal(rng);
      x.noalias() = model.factor().triangularView<Eigen::Lower>() * z;
      sum += g(x, base_info + 0.5 * z.squaredNorm());
    }
    batch_mean[b] = sum / static_cast<double>(hi - lo);
  };

  const int T = std::min(config.threads, B);
  if (T <= 1) {
    for (int b = 0; b < B; ++b) run_batch(b);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < T; ++w)
      pool.emplace_back([&, w] {
        for (int b = w; b < B; b += T) run_batch(b);
      });
    for (auto& th : pool) th.join();
  }

  MCEstimate out;
  out.samples = config.samples;
  out.batches = B;
  double mean = 0.0;
  for (double m : batch_mean) mean += m;
  mean /= B;
  double var = 0.0;
  for (double m : batch_mean) var += (m - mean) * (m - mean);
  var /= (B - 1);
  out.mean = mean;
  out.se = std::sqrt(var / B);
  return out;
}

MCEstimate mc_weighted_entropy(const GaussianModel& model,
                               const std::function<double(const Vector&)>& phi,
                               const MCOracleConfig& config) {
  return mc_expectation(model, [&](const Vector& x, double info) { return phi(x) * info; }, config);
}

MCEstimate mc_weighted_entropy(const GaussianModel& model, const GaussianWFSpec& wf,
                               const MCOracleConfig& config) {
  return mc_weighted_entropy(model, [&](const Vector& x) { return wf(model, x); }, config);
}

namespace {

KernelOperator ar1_operator(double alpha, const NodeFunction& phi, const AR1Quadrature& quad) {
  if (!(std::abs(alpha) < 1.0)) throw ValidationError("AR(1) needs |alpha| < 1");
  if (quad.nodes < 8 || !(quad.x_max_sd > 0.0)) throw ValidationError("bad AR(1) quadrature");
  const double sd = 1.0 / std::sqrt(1.0 - alpha * alpha);
  return ar1_gaussian_kernel(alpha, quad.x_max_sd * sd, quad.nodes, phi);
}

}  // namespace

LogScaled ar1_we_multiplicative(double alpha, const NodeFunction& phi, int n, const AR1Quadrature& quad) {
  const KernelOperator op = ar1_operator(alpha, phi, quad);
  if ((op.phi.array() < 0.0).any()) throw ValidationError("weight must be nonnegative");
  return exact_joint_we_multiplicative(op, ar1_stationary_density(op, alpha), n, true);
}

double ar1_log_mu(double alpha, const NodeFunction& phi, const AR1Quadrature& quad) {
  return std::log(krein_rutman(ar1_operator(alpha, phi, quad)).mu);
}

double gaussian_weighted_information(const GaussianModel& model, const Vector& x, double phi_x) {
  if (phi_x == 0.0) return 0.0;
  return phi_x * model.information(x);
}

double normalizer_expected(const GaussianModel& model, double we, const AdditiveMoments& moments) {
  if (moments.E_phi == 0.0) throw ValidationError("normalizer needs E[phi] != 0");
  return (we - 0.5 * moments.E_Qphi) / (model.dimension() * moments.E_phi);
}

double normalizer_pointwise(const GaussianModel& model, const Vector& x, double phi_x) {
  if (phi_x == 0.0) throw ValidationError("normalizer needs phi(x) != 0");
  const double I = gaussian_weighted_information(model, x, phi_x);
  return (I - 0.5 * model.quadratic_form(x) * phi_x) / (model.dimension() * phi_x);
}

double wi_invariant(const GaussianModel& model, const Vector& x, double phi_x) {
  if (phi_x == 0.0) throw ValidationError("invariant needs phi(x) != 0");
  const double I = gaussian_weighted_information(model, x, phi_x);
  return 2.0 * I / phi_x + model.dimension() - model.quadratic_form(x);
}

ConstancyReport wi_constancy(const GaussianModel& model, const GaussianWFSpec& wf, int points,
                             std::uint64_t seed) {
  if (points < 1) throw ValidationError("points must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const int n = model.dimension();
  ConstancyReport out;
  out.points = points;
  out.entropy = gaussian_entropy(model);
  out.min_value = std::numeric_limits<double>::infinity();
  out.max_value = -std::numeric_limits<double>::infinity();
  Vector z(n);
  for (int k = 0; k < points; ++k) {
    for (int i = 0; i < n; ++i) z(i) = normal(rng);
    const Vector x = model.factor() * z;
    const double v = wi_invariant(model, x, wf(model, x));
    out.min_value = std::min(out.min_value, v);
    out.max_value = std::max(out.max_value, v);
    out.max_dev_from_twice_entropy = std::max(out.max_dev_from_twice_entropy, std::abs(v - 2.0 * out.entropy));
  }
  out.spread = out.max_value - out.min_value;
  return out;
}

}  // namespace werate
