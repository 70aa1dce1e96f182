#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "werate/gaussian_suite.hpp"
#include "werate/iid_rates.hpp"
#include "werate/pressure_lab.hpp"
#include "werate/trajectory_lab.hpp"

using namespace werate;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
  }
  void note(const std::string& what) { notes.push_back(what); }
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int worker_count() { return std::max(1u, std::min(8u, std::thread::hardware_concurrency())); }

// Independent i.i.d. oracle: direct sum over all strings.
double iid_enumerated(std::span<const double> p, std::span<const double> phi, int n, bool additive) {
  const int k = static_cast<int>(p.size());
  std::uint64_t count = 1;
  for (int i = 0; i < n; ++i) count *= k;
  double we = 0.0;
  for (std::uint64_t idx = 0; idx < count; ++idx) {
    std::uint64_t r = idx;
    double prob = 1.0, w = additive ? 0.0 : 1.0;
    for (int j = 0; j < n; ++j, r /= k) {
      prob *= p[r % k];
      w = additive ? w + phi[r % k] : w * phi[r % k];
    }
    if (prob > 0.0) we -= w * prob * std::log(prob);
  }
  return we;
}

double markov_enumerated_additive(const FiniteMarkovModel& m, const std::vector<double>& phi, int n) {
  const auto joint = oracle::markov_joint_pmf(m.P(), m.pi(), n);
  const int k = m.state_count();
  double we = 0.0;
  for (std::size_t idx = 0; idx < joint.size(); ++idx) {
    std::size_t r = idx;
    double w = 0.0;
    for (int j = 0; j < n; ++j, r /= k) w += phi[r % k];
    if (joint[idx] > 0.0) we -= w * joint[idx] * std::log(joint[idx]);
  }
  return we;
}

DiscreteModel random_discrete(std::mt19937_64& rng) {
  const int k = 2 + static_cast<int>(rng() % 3);
  return DiscreteModel(oracle::random_pmf(rng, k), oracle::random_weights(rng, k, 0.1, 2.0));
}

// 1 -------------------------------------------------------------------------
Outcome criterion_1() {
  constexpr double kTol = 1e-10;
  Outcome o;
  std::mt19937_64 rng(101);
  double worst = 0.0;
  for (int t = 0; t < 10; ++t) {
    const auto d = random_discrete(rng);
    const auto r = iid_additive_rates(d);
    for (int n = 2; n <= 8; ++n)
      worst = std::max(worst, std::abs(iid_enumerated(d.pmf(), d.phi(), n, true) - (n * (n - 1.0) * r.A0 + n * r.A1)));
  }
  o.require(worst <= kTol, fmt("max |enumerated - (n(n-1)A0 + nA1)| = %.3e <= %.0e", worst, kTol));
  return o;
}

// 2 -------------------------------------------------------------------------
Outcome criterion_2() {
  constexpr double kTol = 1e-10;
  Outcome o;
  std::mt19937_64 rng(202);
  double worst = 0.0;
  for (int t = 0; t < 10; ++t) {
    const auto d = random_discrete(rng);
    const double hw = weighted_entropy(d), mean = d.mean_weight();
    for (int n = 2; n <= 8; ++n)
      worst = std::max(worst, std::abs(iid_enumerated(d.pmf(), d.phi(), n, false) - n * hw * std::pow(mean, n - 1)));
  }
  o.require(worst <= kTol, fmt("max |enumerated - n H^w (E phi)^(n-1)| = %.3e <= %.0e", worst, kTol));
  return o;
}

// 3 -------------------------------------------------------------------------
Outcome criterion_3() {
  constexpr double kTol = 1e-10, kMinR2 = 0.99;
  Outcome o;
  std::mt19937_64 rng(303);
  double worst = 0.0, worst_r2 = 1.0, worst_c = 0.0;
  for (int t = 0; t < 10; ++t) {
    const FiniteMarkovModel m(oracle::random_positive_stochastic(rng, 3));
    const auto phi = oracle::random_weights(rng, 3, -1.0, 2.0);
    for (int n = 1; n <= 8; ++n) {
      const double b = markov_enumerated_additive(m, phi, n);
      worst = std::max(worst, std::abs(exact_joint_we_additive(m, phi, n) - b));
    }
    const double a0 = primary_rate_additive(m, phi);
    std::vector<double> x, y;
    for (int n = 100; n <= 2000; n += 100) {
      x.push_back(1.0 / n);
      y.push_back(exact_joint_we_additive(m, phi, n) / (double(n) * n) - a0);
    }
    const auto fit = oracle::fit_line(x, y);
    worst_r2 = std::min(worst_r2, fit.r2);
    for (std::size_t i = 0; i < x.size(); ++i) worst_c = std::max(worst_c, std::abs(y[i]) / x[i]);
  }
  o.require(worst <= kTol, fmt("recursion vs enumeration, n <= 8: max error %.3e <= %.0e", worst, kTol));
  o.require(worst_r2 >= kMinR2, fmt("|WE/n^2 - A0| against 1/n: min R^2 = %.6f >= %.2f", worst_r2, kMinR2));
  o.note(fmt("note: smallest C with |WE/n^2 - A0| <= C/n over n = 100..2000: %.4f", worst_c));
  return o;
}

// 4 -------------------------------------------------------------------------
Outcome criterion_4() {
  constexpr double kTol = 1e-6;
  constexpr int kN = 2000;
  Outcome o;
  std::mt19937_64 rng(404);
  double worst = 0.0;
  for (int t = 0; t < 5; ++t) {
    const FiniteMarkovModel m(oracle::random_positive_stochastic(rng, 2, 0.05));
    const double c = m.pi()(0) / m.pi()(1);
    const std::vector<double> phi{1.0, -c};
    const double a1 = secondary_rate_additive(m, phi).A1;
    const double slope = exact_joint_we_additive(m, phi, kN + 1) - exact_joint_we_additive(m, phi, kN);
    worst = std::max(worst, std::abs(slope - a1));
  }
  o.require(worst <= kTol, fmt("|WE(2001) - WE(2000) - A1| max %.3e <= %.0e", worst, kTol));
  return o;
}

// 5 -------------------------------------------------------------------------
Outcome criterion_5() {
  constexpr double kTol = 1e-10, kExampleTol = 1e-12;
  Outcome o;
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const int n = 2 + static_cast<int>(rng() % 49);
    Matrix A(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = u(rng);
    worst = std::max(worst, std::abs(krein_rutman(kernel_from_matrix(A)).mu - oracle::dense_spectral_radius(A)));
  }
  o.require(worst <= kTol, fmt("power iteration vs dense eigensolve: max |dmu| %.3e <= %.0e", worst, kTol));
  const auto m = FiniteMarkovModel::from_rows({{0.5, 0.5}, {0.5, 0.5}});
  const std::vector<double> phi{1.0, 2.0};
  const double mu = krein_rutman(build_weighted_kernel(m, phi)).mu;
  o.require(std::abs(mu - 1.5) <= kExampleTol, fmt("two-state example mu = %.17g, |mu - 3/2| = %.3e", mu, std::abs(mu - 1.5)));
  return o;
}

// 6 -------------------------------------------------------------------------
Outcome criterion_6() {
  constexpr double kTol = 5e-3;
  constexpr int kN = 500;
  Outcome o;
  std::mt19937_64 rng(606);
  for (int k : {2, 3, 4, 5, 3}) {
    const FiniteMarkovModel m(oracle::random_positive_stochastic(rng, k));
    const auto phi = oracle::random_weights(rng, k, 0.5, 2.0);
    const auto rate = primary_rate_multiplicative(m, phi);
    const auto b1 = secondary_rate_multiplicative(m, phi);
    const double err = std::abs(exact_joint_we_multiplicative(m, phi, kN).log_abs() / kN - rate.B0);
    o.require(err <= kTol, fmt("%d states: |(1/n) ln WE - ln mu| = %.4e at n = %d (tol %.0e)", k, err, kN, kTol));
    o.note(fmt("note: (ln n + ln B1)/n = %.4e", (std::log(double(kN)) + std::log(b1.B1)) / kN));
  }
  return o;
}

// 7 -------------------------------------------------------------------------
Outcome criterion_7() {
  constexpr double kTol = 1e-6, kMinGap = 0.2;
  constexpr int kN = 300;
  Outcome o;
  std::mt19937_64 rng(707);
  int used = 0;
  while (used < 5) {
    const FiniteMarkovModel m(oracle::random_positive_stochastic(rng, 2, 0.05));
    const auto phi = oracle::random_weights(rng, 2, 0.5, 2.0);
    const auto rate = primary_rate_multiplicative(m, phi);
    if (rate.kr.gap_estimate < kMinGap) continue;
    ++used;
    const auto b = secondary_rate_multiplicative(m, phi);
    const double mu = rate.mu;
    const double ratio = exact_joint_we_multiplicative(m, phi, kN).value() / (kN * std::pow(mu, kN));
    const double err = std::abs(ratio - b.B1), err_swapped = std::abs(ratio - b.B1_swapped);
    o.require(err <= kTol, fmt("gap %.3f: |WE/(n mu^n) - B1| = %.3e at n = %d (tol %.0e)", rate.kr.gap_estimate, err, kN, kTol));
    const double slope = exact_joint_we_multiplicative(m, phi, kN + 1).value() / std::pow(mu, kN + 1) -
                         exact_joint_we_multiplicative(m, phi, kN).value() / std::pow(mu, kN);
    o.note(fmt("note: swapped pairing error %.3e; n * (ratio - B1) = %.4f; |slope - B1| = %.3e", err_swapped,
               kN * (ratio - b.B1), std::abs(slope - b.B1)));
  }
  return o;
}

// 8 -------------------------------------------------------------------------
Outcome criterion_8() {
  constexpr double kSlackFloor = -1e-12, kWitnessTol = 1e-9, kKlRateTol = 1e-3;
  constexpr int kCandidates = 1000, kKlN = 200;
  Outcome o;
  struct Case {
    FiniteMarkovModel m;
    std::vector<double> phi;
  };
  std::mt19937_64 rng(808);
  std::vector<Case> cases;
  cases.push_back({FiniteMarkovModel::from_rows({{0.5, 0.5}, {0.5, 0.5}}), {1.0, 2.0}});
  cases.push_back({FiniteMarkovModel(oracle::random_positive_stochastic(rng, 3)), oracle::random_weights(rng, 3, 0.3, 2.0)});
  cases.push_back({FiniteMarkovModel(oracle::random_positive_stochastic(rng, 4)), oracle::random_weights(rng, 4, 0.3, 2.0)});
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& c = cases[i];
    const auto rep = randomized_audit(c.m, c.phi, kCandidates, 9000 + i);
    o.require(rep.min_slack >= kSlackFloor, fmt("kernel %zu: min slack over %d candidates = %.3e", i, kCandidates, rep.min_slack));
    o.require(rep.equality_witness_residual <= kWitnessTol,
              fmt("kernel %zu: twisted chain |slack| = %.3e <= %.0e", i, rep.equality_witness_residual, kWitnessTol));
    const auto kr = krein_rutman(build_weighted_kernel(c.m, c.phi));
    const double rate = twisted_tilted_kl(c.m, c.phi, kr, kKlN) / kKlN;
    o.require(rate < kKlRateTol, fmt("kernel %zu: KL rate at n = %d is %.3e < %.0e", i, kKlN, rate, kKlRateTol));
  }
  return o;
}

// 9 -------------------------------------------------------------------------
Matrix random_spd(std::mt19937_64& rng, int n, double scale) {
  std::normal_distribution<double> z;
  Matrix B(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) B(i, j) = z(rng);
  return scale * (B * B.transpose() / n + 0.3 * Matrix::Identity(n, n));
}

Outcome criterion_9() {
  constexpr double kMaxZ = 4.0, kSpecialTol = 1e-10;
  constexpr int kInstances = 5;
  Outcome o;
  std::mt19937_64 rng(909);
  std::normal_distribution<double> z;
  MCOracleConfig cfg;
  cfg.samples = 1'000'000;
  cfg.batches = 100;
  cfg.threads = worker_count();
  double worst_z = 0.0;
  for (int inst = 0; inst < kInstances; ++inst) {
    const int n = 1 + inst;
    const auto m = GaussianModel::from_covariance(random_spd(rng, n, 1.0));
    const Matrix A = random_spd(rng, n, 0.15);
    Vector b(n), t(n);
    for (int i = 0; i < n; ++i) b(i) = z(rng), t(i) = 0.3 * z(rng);
    cfg.seed = 7000 + inst;

    auto check = [&](const char* name, double closed, const MCEstimate& mc) {
      const double zs = (mc.mean - closed) / mc.se;
      worst_z = std::max(worst_z, std::abs(zs));
      o.require(std::abs(zs) <= kMaxZ, fmt("n = %d %-13s closed %.6f  MC %.6f +- %.6f  z = %+.2f", n, name, closed, mc.mean, mc.se, zs));
    };
    check("constant", we_constant_wf(m, 1.7), mc_weighted_entropy(m, GaussianWFSpec::constant_times_n(1.7), cfg));
    const double c0 = 1.0;
    check("additive", we_additive_gaussian(m, polynomial_moments(m, c0, b, A)),
          mc_weighted_entropy(m, [&](const Vector& x) { return c0 + b.dot(x) + x.dot(A * x); }, cfg));
    check("quadratic", we_quadratic_wf(m, A).we, mc_weighted_entropy(m, GaussianWFSpec::quadratic(A), cfg));
    check("exp_quadratic", we_exp_quadratic(m, -A, t).we, mc_weighted_entropy(m, GaussianWFSpec::exp_quadratic(-A, t), cfg));

    const double H = gaussian_entropy(m);
    const double shift = t.dot(m.precision() * t);
    const double stated = H * std::exp(0.5 * shift);
    const double computed = we_exp_quadratic(m, Matrix::Zero(n, n), t).we;
    o.require(std::abs(computed - stated) <= kSpecialTol,
              fmt("n = %d A = 0: we_exp_quadratic %.10f vs H exp(t'C^-1 t/2) %.10f, diff %.3e", n, computed, stated,
                  std::abs(computed - stated)));
    const auto mc0 = mc_weighted_entropy(m, GaussianWFSpec::exp_quadratic(Matrix::Zero(n, n), t), cfg);
    o.note(fmt("note: A = 0 MC %.6f +- %.6f; exp(t'C^-1 t/2)(H + t'C^-1 t/2) = %.6f", mc0.mean, mc0.se,
               std::exp(0.5 * shift) * (H + 0.5 * shift)));
  }
  o.note(fmt("note: worst |z| over all closed forms %.2f", worst_z));
  return o;
}

// 10 ------------------------------------------------------------------------
Outcome criterion_10() {
  constexpr double kDetTol = 1e-12, kConstTol = 1e-8, kRateTol = 1e-3;
  constexpr int kRateN = 200, kPoints = 100;
  Outcome o;
  double worst_det = 0.0;
  for (double a : {-0.9, -0.5, 0.0, 0.3, 0.5, 0.8, 0.95})
    for (int n : {1, 2, 3, 10, 50, 100, 200}) {
      const auto m = GaussianModel::ar1(a, n);
      worst_det = std::max(worst_det, std::abs(m.precision().determinant() - (1 - a * a)));
      worst_det = std::max(worst_det, std::abs(ar1_precision_determinant(a, n) - (1 - a * a)));
    }
  o.require(worst_det <= kDetTol, fmt("max |det(precision) - (1 - alpha^2)| = %.3e for n <= 200", worst_det));

  std::mt19937_64 rng(1010);
  double worst_spread = 0.0;
  for (int n : {3, 10, 40}) {
    const auto m = GaussianModel::ar1(0.5, n);
    const Matrix A = random_spd(rng, n, 0.05);
    for (const auto& wf : {GaussianWFSpec::quadratic(A), GaussianWFSpec::exp_quadratic(-A, Vector::Zero(n)),
                           GaussianWFSpec::constant_times_n(1.0)})
      worst_spread = std::max(worst_spread, wi_constancy(m, wf, kPoints, 77 + n).spread);
  }
  o.require(worst_spread <= kConstTol, fmt("WI invariant spread over %d points: %.3e <= %.0e", kPoints, worst_spread, kConstTol));

  const double alpha = 0.5;
  auto phi = [](double x) { return std::exp(-0.25 * x * x); };
  const double log_mu = ar1_log_mu(alpha, phi);
  const double rate = ar1_we_multiplicative(alpha, phi, kRateN).log_abs() / kRateN;
  o.require(std::abs(rate - log_mu) <= kRateTol,
            fmt("|(1/n) ln WE - ln mu| at n = %d: %.4e (ln mu = %.8f)", kRateN, std::abs(rate - log_mu), log_mu));
  const double r2 = ar1_we_multiplicative(alpha, phi, 2 * kRateN).log_abs() / (2 * kRateN);
  o.note(fmt("note: same gap at n = %d: %.4e; n * gap = %.3f", 2 * kRateN, std::abs(r2 - log_mu), kRateN * std::abs(rate - log_mu)));
  return o;
}

// 11 ------------------------------------------------------------------------
Outcome criterion_11() {
  constexpr double kGrowthTol = 1e-3, kZeroTol = 1e-10, kShiftTol = 1e-8;
  constexpr int kN = 40;
  Outcome o;
  for (double a : {0.5, 1.0}) {
    const double kr = topological_entropy(a).log_mu;
    const auto direct = topological_entropy_direct(a, kN);
    o.require(std::abs(direct.step_growth - kr) <= kGrowthTol,
              fmt("a = %.1f: direct growth %.8f vs KR ln mu %.8f, diff %.3e", a, direct.step_growth, kr,
                  std::abs(direct.step_growth - kr)));
    o.note(fmt("note: a = %.1f Cesaro mean (1/n) ln volume at n = %d: %.6f", a, kN, direct.cesaro));
  }
  const double h0 = topological_entropy(0.0).log_mu;
  o.require(std::abs(h0) <= kZeroTol, fmt("a = 0: h_top = %.3e", h0));
  const auto dom = TopoDomain::flat(-4.0, 4.0);
  const NodeFunction chi = [](double x) { return -0.5 * x * x; };
  for (double c : {-1.3, 0.7}) {
    const double base = topological_pressure(chi, 0.5, dom).log_mu;
    const double shifted = topological_pressure([&](double x) { return chi(x) + c; }, 0.5, dom).log_mu;
    o.require(std::abs(shifted - base - c) <= kShiftTol,
              fmt("P(chi + %.1f) - P(chi) - %.1f = %.3e", c, c, shifted - base - c));
  }
  return o;
}

// 12 ------------------------------------------------------------------------
Outcome criterion_12() {
  constexpr double kRelTol = 0.05, kZeroSe = 3.0;
  constexpr int kN = 100'000, kSeeds = 16;
  Outcome o;
  std::vector<std::uint64_t> seeds;
  for (int s = 1; s <= kSeeds; ++s) seeds.push_back(s);
  const auto chain = FiniteMarkovModel::from_rows({{0.7, 0.3}, {0.3, 0.7}});
  const std::vector<double> phi{1.0, 2.0};
  const AR1Process ar{0.5};
  const NodeFunction g = [](double x) { return 1.0 + x * x; };

  using Run = std::function<ConvergenceReport(std::uint64_t)>;
  const std::vector<std::pair<std::string, Run>> runs{
      {"chain smb", [&](std::uint64_t s) { return empirical_smb(simulate(chain, kN, s), chain); }},
      {"chain wi_additive", [&](std::uint64_t s) { return empirical_wi_additive(simulate(chain, kN, s), chain, phi); }},
      {"chain wi_multiplicative", [&](std::uint64_t s) { return empirical_wi_multiplicative(simulate(chain, kN, s), chain, phi); }},
      {"ar1 smb", [&](std::uint64_t s) { return empirical_smb(simulate(ar, kN, s), ar); }},
      {"ar1 wi_additive", [&](std::uint64_t s) { return empirical_wi_additive(simulate(ar, kN, s), ar, g); }},
      {"ar1 wi_multiplicative", [&](std::uint64_t s) { return empirical_wi_multiplicative(simulate(ar, kN, s), ar, g); }},
  };
  for (const auto& [name, run] : runs) {
    const auto reps = run_replicates(seeds, run, worker_count());
    const auto sum = summarize(reps);
    if (sum.target == 0.0) {
      bool ok = true;
      for (const auto& r : reps) ok = ok && r.final_error <= kZeroSe * r.batch_se;
      o.require(ok, fmt("%s: zero target, all seeds within %.0f batch SEs", name.c_str(), kZeroSe));
    } else {
      o.require(sum.max_relative_error <= kRelTol,
                fmt("%s: target %.6f, max relative error over %d seeds %.4f", name.c_str(), sum.target, kSeeds, sum.max_relative_error));
    }
    std::ostringstream a, b;
    write_convergence_csv(a, reps);
    write_convergence_csv(b, run_replicates(seeds, run, 1));
    o.require(a.str() == b.str(), fmt("%s: CSV identical across worker counts", name.c_str()));
  }
  return o;
}

struct Criterion {
  int id;
  const char* title;
  double budget_s;
  Outcome (*fn)();
};

const Criterion kCriteria[] = {
    {1, "i.i.d. additive identity", 5, criterion_1},
    {2, "i.i.d. multiplicative identity", 5, criterion_2},
    {3, "Markov additive WE and primary rate", 30, criterion_3},
    {4, "secondary additive rate", 10, criterion_4},
    {5, "Krein-Rutman eigenvalue", 5, criterion_5},
    {6, "multiplicative primary rate at n = 500", 10, criterion_6},
    {7, "multiplicative secondary rate at n = 300", 10, criterion_7},
    {8, "variational principle", 60, criterion_8},
    {9, "Gaussian closed forms", 120, criterion_9},
    {10, "AR(1) determinant, WI invariant, multiplicative rate", 60, criterion_10},
    {11, "topological entropy and pressure", 60, criterion_11},
    {12, "trajectory suite", 120, criterion_12},
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  bool verbose = true;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--criterion") && i + 1 < argc) only = std::atoi(argv[++i]);
    else if (!std::strcmp(argv[i], "--quiet")) verbose = false;
    else {
      std::fprintf(stderr, "usage: %s [--criterion N] [--quiet]\n", argv[0]);
      return 2;
    }
  }
  int failed = 0, ran = 0;
  for (const auto& c : kCriteria) {
    if (only && c.id != only) continue;
    ++ran;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.fn();
    } catch (const std::exception& e) {
      out.pass = false;
      out.note(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.require(secs < c.budget_s, fmt("runtime %.2f s < %.0f s", secs, c.budget_s));
    std::printf("%s criterion %2d: %s\n", out.pass ? "PASS" : "FAIL", c.id, c.title);
    if (verbose)
      for (const auto& n : out.notes) std::printf("    %s\n", n.c_str());
    std::fflush(stdout);
    if (!out.pass) ++failed;
  }
  if (!ran) {
    std::fprintf(stderr, "no criterion %d\n", only);
    return 2;
  }
  return failed ? 1 : 0;
}
