#include <doctest.h>

#include <cmath>
#include <random>

#include "werate/gaussian_suite.hpp"

using namespace werate;

namespace {

Matrix random_spd(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> z;
  Matrix B(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) B(i, j) = z(rng);
  return B * B.transpose() / n + 0.5 * Matrix::Identity(n, n);
}

/// One-dimensional E[phi (-ln f)] by trapezoid on +-14 sd.
double scalar_we(double var, const std::function<double(double)>& phi) {
  const double sd = std::sqrt(var), h = 28.0 * sd / 20000;
  double s = 0.0;
  for (int i = 0; i <= 20000; ++i) {
    const double x = -14.0 * sd + i * h;
    const double lf = -0.5 * std::log(2 * M_PI * var) - 0.5 * x * x / var;
    s += (i == 0 || i == 20000 ? 0.5 : 1.0) * h * std::exp(lf) * phi(x) * (-lf);
  }
  return s;
}

double log_det(const Matrix& M) { return std::log(M.determinant()); }

}  // namespace

TEST_CASE("AR(1) block structure") {
  for (double a : {-0.7, 0.0, 0.5, 0.9}) {
    for (int n : {1, 2, 7, 30}) {
      const auto m = GaussianModel::ar1(a, n);
      Matrix C(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) C(i, j) = std::pow(a, std::abs(i - j)) / (1 - a * a);
      CHECK((m.covariance() - C).cwiseAbs().maxCoeff() < 1e-12 / (1 - a * a));
      CHECK((m.precision() * C - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-10);
      CHECK(ar1_precision_determinant(a, n) == doctest::Approx(1 - a * a).epsilon(1e-13));
      CHECK(m.log_det_covariance() == doctest::Approx(-std::log(1 - a * a)).epsilon(1e-12));
    }
  }
  CHECK(GaussianModel::ar1(0.5, 3).covariance()(0, 0) == doctest::Approx(4.0 / 3.0));
  CHECK_THROWS_AS(GaussianModel::ar1(1.0, 3), ValidationError);
  CHECK_THROWS_AS(GaussianModel::from_covariance((Matrix(2, 2) << 1, 2, 2, 1).finished()), ValidationError);
}

TEST_CASE("entropy and information") {
  std::mt19937_64 rng(3);
  for (int n : {1, 3, 6}) {
    const Matrix C = random_spd(rng, n);
    const auto m = GaussianModel::from_covariance(C);
    CHECK(gaussian_entropy(m) == doctest::Approx(0.5 * (n * std::log(2 * M_PI * M_E) + log_det(C))).epsilon(1e-12));
    const Vector x = Vector::Random(n);
    const double q = x.dot(C.ldlt().solve(x));
    CHECK(m.quadratic_form(x) == doctest::Approx(q).epsilon(1e-12));
    CHECK(m.information(x) == doctest::Approx(0.5 * (n * std::log(2 * M_PI) + log_det(C)) + 0.5 * q).epsilon(1e-12));
  }
}

TEST_CASE("closed forms in one dimension against quadrature") {
  const double var = 1.7;
  const auto m = GaussianModel::from_covariance((Matrix(1, 1) << var).finished());
  CHECK(we_constant_wf(m, 2.5) == doctest::Approx(2.5 * gaussian_entropy(m)).epsilon(1e-13));
  const Matrix A = (Matrix(1, 1) << 0.8).finished();
  CHECK(we_quadratic_wf(m, A).we == doctest::Approx(scalar_we(var, [](double x) { return 0.8 * x * x; })).epsilon(1e-9));
  for (double a : {-0.6, 0.0, 0.3}) {
    for (double t : {0.0, 0.4, -1.1}) {
      const double mm = 1 / var - a;
      auto phi = [&](double x) { return std::exp(x * mm * t + 0.5 * a * x * x); };
      const auto r = we_exp_quadratic(m, (Matrix(1, 1) << a).finished(), (Vector(1) << t).finished());
      CHECK(r.we == doctest::Approx(scalar_we(var, phi)).epsilon(1e-8));
    }
  }
  CHECK_THROWS_AS(we_exp_quadratic(m, (Matrix(1, 1) << 1.0).finished(), (Vector(1) << 0.0).finished()), ValidationError);
}

TEST_CASE("closed forms against Monte Carlo") {
  std::mt19937_64 rng(17);
  const int n = 4;
  const Matrix C = random_spd(rng, n);
  const auto m = GaussianModel::from_covariance(C);
  Matrix A = random_spd(rng, n) * 0.2;
  Vector t = Vector::Constant(n, 0.15);
  MCOracleConfig cfg;
  cfg.samples = 200'000;
  cfg.batches = 50;
  cfg.threads = 2;
  cfg.seed = 5;
  for (const auto& wf : {GaussianWFSpec::constant_times_n(1.3), GaussianWFSpec::quadratic(A),
                         GaussianWFSpec::exp_quadratic(-A, t), GaussianWFSpec::exp_linear(t)}) {
    const auto mc = mc_weighted_entropy(m, wf, cfg);
    const double z = (mc.mean - we_closed_form(m, wf)) / mc.se;
    CHECK(std::abs(z) < 4.5);
  }
}

TEST_CASE("Monte Carlo oracle determinism") {
  const auto m = GaussianModel::ar1(0.5, 3);
  MCOracleConfig cfg;
  cfg.samples = 50'000;
  cfg.batches = 10;
  cfg.seed = 9;
  const auto wf = GaussianWFSpec::constant_times_n(1.0);
  const auto a = mc_weighted_entropy(m, wf, cfg);
  cfg.threads = 5;
  const auto b = mc_weighted_entropy(m, wf, cfg);
  CHECK(a.mean == b.mean);
  CHECK(a.se == b.se);
  CHECK(a.samples == 50'000);
  cfg.samples = 100;
  CHECK_THROWS_AS(mc_weighted_entropy(m, wf, cfg), ValidationError);
}

TEST_CASE("WI invariant equals twice the entropy") {
  std::mt19937_64 rng(23);
  const auto m = GaussianModel::from_covariance(random_spd(rng, 5));
  const Matrix A = random_spd(rng, 5) * 0.1;
  for (const auto& wf : {GaussianWFSpec::quadratic(A), GaussianWFSpec::exp_quadratic(-A, Vector::Zero(5)),
                         GaussianWFSpec::constant_times_n(0.7)}) {
    const auto r = wi_constancy(m, wf, 200, 4);
    CHECK(r.points == 200);
    CHECK(r.spread < 1e-10);
    CHECK(r.max_dev_from_twice_entropy < 1e-10);
  }
}

TEST_CASE("normalizers approach h - 1/2") {
  const double a = 0.6;
  const double target = 0.5 * std::log(2 * M_PI * M_E) - 0.5;
  for (int n : {10, 100, 400}) {
    const auto m = GaussianModel::ar1(a, n);
    const Vector x = Vector::LinSpaced(n, -1.0, 1.0);
    const double exact_gap = -0.5 * std::log(1 - a * a) / n;
    CHECK(normalizer_pointwise(m, x, 1.0) - target == doctest::Approx(exact_gap).epsilon(1e-9));
    const auto mom = polynomial_moments(m, 1.0, Vector(), Matrix::Zero(n, n));
    CHECK(normalizer_expected(m, gaussian_entropy(m), mom) - target == doctest::Approx(exact_gap).epsilon(1e-9));
  }
}

TEST_CASE("AR(1) multiplicative WE by transfer passes") {
  const double a = 0.5;
  for (int n : {2, 5, 20}) {
    const auto ones = ar1_we_multiplicative(a, [](double) { return 1.0; }, n);
    CHECK(ones.value() == doctest::Approx(gaussian_entropy(GaussianModel::ar1(a, n))).epsilon(1e-10));
  }
  const double beta = 0.25;
  for (int n : {2, 6, 15}) {
    const auto m = GaussianModel::ar1(a, n);
    const double closed = we_exp_quadratic(m, -2 * beta * Matrix::Identity(n, n), Vector::Zero(n)).we;
    const double transfer = ar1_we_multiplicative(a, [&](double x) { return std::exp(-beta * x * x); }, n).value();
    CHECK(transfer == doctest::Approx(closed).epsilon(1e-9));
  }
  CHECK(std::abs(ar1_log_mu(a, [](double) { return 1.0; })) < 1e-12);
  auto log_e = [&](int n) {
    const auto m = GaussianModel::ar1(a, n);
    return -0.5 * log_det(Matrix::Identity(n, n) + 2 * beta * m.covariance());
  };
  const double slope = log_e(201) - log_e(200);
  CHECK(ar1_log_mu(a, [&](double x) { return std::exp(-beta * x * x); }) == doctest::Approx(slope).epsilon(1e-9));
}
