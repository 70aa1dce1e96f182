#include "werate/markov_engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "werate/model_core.hpp"

namespace werate {

namespace {

Matrix checked_stochastic(Matrix P) {
  if (P.rows() == 0 || P.rows() != P.cols())
    throw ValidationError("transition matrix must be square and non-empty");
  for (Eigen::Index x = 0; x < P.rows(); ++x) {
    std::vector<double> row(P.cols());
    for (Eigen::Index y = 0; y < P.cols(); ++y) row[y] = P(x, y);
    const std::string what = "row " + std::to_string(x) + " of P";
    const auto fixed = checked_pmf(row, what.c_str());
    for (Eigen::Index y = 0; y < P.cols(); ++y) P(x, y) = fixed[y];
  }
  return P;
}

double plogp(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

}  // namespace

bool is_irreducible(const Matrix& P) {
  const Eigen::Index k = P.rows();
  auto reach_all = [&](bool forward) {
    std::vector<char> seen(k, 0);
    std::vector<Eigen::Index> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const auto x = stack.back();
      stack.pop_back();
      for (Eigen::Index y = 0; y < k; ++y) {
        const double w = forward ? P(x, y) : P(y, x);
        if (w > 0.0 && !seen[y]) {
          seen[y] = 1;
          stack.push_back(y);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
  };
  return reach_all(true) && reach_all(false);
}

Vector stationary_distribution(const Matrix& P) {
  if (P.rows() != P.cols() || P.rows() == 0)
    throw ValidationError("transition matrix must be square and non-empty");
  if (!is_irreducible(P))
    throw ValidationError("chain is reducible: the stationary law is not unique");
  const Eigen::Index k = P.rows();
  Matrix A = P.transpose() - Matrix::Identity(k, k);
  A.row(k - 1).setOnes();
  Vector b = Vector::Zero(k);
  b(k - 1) = 1.0;
  Vector pi = A.fullPivLu().solve(b);
  for (Eigen::Index x = 0; x < k; ++x) pi(x) = std::max(pi(x), 0.0);
  pi /= pi.sum();
  return pi;
}

FiniteMarkovModel::FiniteMarkovModel(Matrix P)
    : P_(checked_stochastic(std::move(P))), pi_(stationary_distribution(P_)), lambda_(pi_) {}

FiniteMarkovModel::FiniteMarkovModel(Matrix P, Vector lambda) : FiniteMarkovModel(std::move(P)) {
  if (lambda.size() != P_.rows()) throw ValidationError("lambda has the wrong length");
  const auto fixed = checked_pmf(std::span<const double>(lambda.data(), lambda.size()), "lambda");
  lambda_ = Eigen::Map<const Vector>(fixed.data(), fixed.size());
  for (Eigen::Index x = 0; x < lambda_.size(); ++x)
    if (lambda_(x) > 0.0 && pi_(x) <= 0.0)
      throw ValidationError("supp(lambda) must lie inside supp(pi)");
  has_lambda_ = true;
}

FiniteMarkovModel FiniteMarkovModel::from_rows(const std::vector<std::vector<double>>& rows) {
  const auto k = static_cast<Eigen::Index>(rows.size());
  Matrix P(k, k);
  for (Eigen::Index x = 0; x < k; ++x) {
    if (static_cast<Eigen::Index>(rows[x].size()) != k)
      throw ValidationError("transition matrix must be square");
    for (Eigen::Index y = 0; y < k; ++y) P(x, y) = rows[x][y];
  }
  return FiniteMarkovModel(std::move(P));
}

double entropy_rate(const FiniteMarkovModel& model) {
  const auto& P = model.P();
  const auto& pi = model.pi();
  double h = 0.0;
  for (Eigen::Index x = 0; x < P.rows(); ++x) {
    double row = 0.0;
    for (Eigen::Index y = 0; y < P.cols(); ++y) row -= plogp(P(x, y));
    h += pi(x) * row;
  }
  return h;
}

double stationary_mean(const FiniteMarkovModel& model, std::span<const double> phi) {
  if (static_cast<Eigen::Index>(phi.size()) != model.state_count())
    throw ValidationError("phi must have one value per state");
  double m = 0.0;
  for (int x = 0; x < model.state_count(); ++x) m += model.pi()(x) * phi[x];
  return m;
}

double DoeblinReport::geometric_bound(int s) const { return 2.0 * std::pow(1.0 - rho, s); }

DoeblinReport doeblin_report(const FiniteMarkovModel& model, int k_max) {
  const auto& P = model.P();
  const int k = model.state_count();
  if (k_max < 0) k_max = (k - 1) * (k - 1) + 1;
  DoeblinReport r;
  r.rho = P.minCoeff();
  Eigen::MatrixXi step = (P.array() > 0.0).cast<int>();
  Eigen::MatrixXi power = step;
  for (int j = 0; j <= k_max; ++j) {
    if ((power.array() > 0).all()) {
      r.k = j;
      break;
    }
    power = ((power * step).array() > 0).cast<int>();
  }
  return r;
}

double exact_joint_we_additive(const FiniteMarkovModel& model, std::span<const double> phi, int n,
                               Start start) {
  if (n < 1) throw ValidationError("n must be >= 1");
  const int k = model.state_count();
  if (static_cast<int>(phi.size()) != k) throw ValidationError("phi must have one value per state");
  const auto& P = model.P();
  const Vector& init = start == Start::Stationary ? model.pi() : model.lambda();

  // Per current state x: mass m, E[S; x], E[L; x], E[S L; x] with
  // S = sum of phi over the prefix and L = -ln of the prefix probability.
  Vector m(k), s(k), l(k), sl(k);
  for (int x = 0; x < k; ++x) {
    const double boundary =
        (start == Start::InitialConditional || init(x) <= 0.0) ? 0.0 : -std::log(init(x));
    m(x) = init(x);
    s(x) = init(x) * phi[x];
    l(x) = init(x) * boundary;
    sl(x) = init(x) * phi[x] * boundary;
  }

  Matrix G = Matrix::Zero(k, k);  // P(x,y) * (-ln P(x,y))
  for (int x = 0; x < k; ++x)
    for (int y = 0; y < k; ++y)
      if (P(x, y) > 0.0) G(x, y) = -P(x, y) * std::log(P(x, y));

  for (int step = 1; step < n; ++step) {
    Vector m2 = Vector::Zero(k), s2 = Vector::Zero(k), l2 = Vector::Zero(k), sl2 = Vector::Zero(k);
    for (int x = 0; x < k; ++x) {
      for (int y = 0; y < k; ++y) {
        const double p = P(x, y);
        if (p == 0.0) continue;
        const double g = G(x, y);  // p * (-ln p)
        m2(y) += p * m(x);
        s2(y) += p * (s(x) + m(x) * phi[y]);
        l2(y) += p * l(x) + g * m(x);
        // (S + phi_y)(L + g) = S L + S g + phi_y L + phi_y g
        sl2(y) += p * sl(x) + g * s(x) + phi[y] * (p * l(x) + g * m(x));
      }
    }
    m.swap(m2);
    s.swap(s2);
    l.swap(l2);
    sl.swap(sl2);
  }
  return sl.sum();
}

double primary_rate_additive(const FiniteMarkovModel& model, std::span<const double> phi) {
  return stationary_mean(model, phi) * entropy_rate(model);
}

SecondaryRateResult secondary_rate_additive(const FiniteMarkovModel& model,
                                            std::span<const double> phi, double tol,
                                            int min_terms) {
  const int k = model.state_count();
  const double mean = stationary_mean(model, phi);
  if (std::abs(mean) > 1e-10)
    throw ValidationError("secondary additive rate needs E_pi[phi] = 0 (got " +
                          std::to_string(mean) + ")");
  const auto& P = model.P();
  const auto& pi = model.pi();
  const double rho = P.minCoeff();
  if (rho <= 0.0) throw ValidationError("Doeblin condition fails: some transition has zero probability");

  Vector phi_v = Eigen::Map<const Vector>(phi.data(), k);
  // u(y) = sum_x pi(x) p(x,y) ln p(x,y);  v(y) = sum_z p(y,z) ln p(y,z)
  Vector u = Vector::Zero(k), v = Vector::Zero(k);
  for (int x = 0; x < k; ++x)
    for (int y = 0; y < k; ++y) {
      const double pl = plogp(P(x, y));
      u(y) += pi(x) * pl;
      v(x) += pl;
    }
  const double max_phi = phi_v.cwiseAbs().maxCoeff();
  double max_plogp = 0.0;
  for (int x = 0; x < k; ++x)
    for (int y = 0; y < k; ++y) max_plogp = std::max(max_plogp, std::abs(plogp(P(x, y))));
  const double scale = max_phi * max_plogp * k * k / rho;

  // Branch 1: transition before the weighted symbol, sum_s u^T P^s phi.
  // Branch 2: weighted symbol before the transition, sum_s (phi pi)^T P^s v.
  Vector right = phi_v;
  Eigen::RowVectorXd left = phi_v.cwiseProduct(pi).transpose();
  double sum = 0.0;
  int s = 0;
  constexpr int kMaxTerms = 50'000'000;
  for (;; ++s) {
    const double tail = 2.0 * std::pow(1.0 - rho, s) * scale;
    if (s >= min_terms && tail < tol) {
      return {-sum, s, tail};
    }
    if (s >= kMaxTerms) throw NumericError("secondary rate series did not reach tolerance");
    sum += u.dot(right) + left.dot(v);
    right = P * right;
    left = left * P;
  }
}

Matrix augment_k_order(int alphabet, int order,
                       const std::function<double(std::span<const int>, int)>& conditional) {
  if (alphabet < 1 || order < 1) throw ValidationError("alphabet and order must be >= 1");
  const std::uint64_t states = guarded_string_count(static_cast<std::size_t>(alphabet), order);
  Matrix P = Matrix::Zero(states, states);
  std::vector<int> ctx(order);
  for (std::uint64_t i = 0; i < states; ++i) {
    decode_word(i, alphabet, ctx);
    // successor tuple drops ctx[0] and appends y
    const std::uint64_t shifted = (i * alphabet) % states;
    for (int y = 0; y < alphabet; ++y) P(i, shifted + y) = conditional(ctx, y);
  }
  return P;
}

}  // namespace werate
