#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "werate/gaussian_suite.hpp"
#include "werate/iid_rates.hpp"
#include "werate/pressure_lab.hpp"
#include "werate/trajectory_lab.hpp"

namespace py = pybind11;
using namespace werate;

namespace {

py::dict log_scaled(const LogScaled& v) {
  py::dict d;
  d["value"] = v.value();
  d["log_abs"] = v.log_abs();
  d["sign"] = v.mantissa > 0 ? 1 : v.mantissa < 0 ? -1 : 0;
  return d;
}

py::dict kr_dict(const KreinRutmanResult& r) {
  py::dict d;
  d["mu"] = r.mu;
  d["right"] = r.phi_right;
  d["left"] = r.psi_left;
  d["gap_estimate"] = r.gap_estimate;
  d["iterations"] = r.iterations;
  return d;
}

py::dict report_dict(const ConvergenceReport& r) {
  py::dict d;
  d["statistic"] = r.statistic;
  d["target"] = r.target;
  d["checkpoints"] = r.checkpoints;
  d["estimates"] = r.estimates;
  d["final_error"] = r.final_error;
  d["batch_se"] = r.batch_se;
  d["seed"] = r.seed;
  return d;
}

Start parse_start(const std::string& s) {
  if (s == "stationary") return Start::Stationary;
  if (s == "initial") return Start::Initial;
  if (s == "conditional") return Start::InitialConditional;
  throw ValidationError("start must be stationary, initial or conditional");
}

FiniteMarkovModel chain(const Matrix& P, const std::optional<Vector>& initial) {
  return initial ? FiniteMarkovModel(P, *initial) : FiniteMarkovModel(P);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Weighted entropy rates: closed forms, transfer operators and simulation";

  auto base = py::register_exception<Error>(m, "WerateError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<InfiniteInformationError>(m, "InfiniteInformationError", base.ptr());
  py::register_exception<SizeGuardError>(m, "SizeGuardError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());

  m.def("weighted_entropy", [](const std::vector<double>& p, const std::vector<double>& phi) {
    return weighted_entropy(DiscreteModel(p, phi));
  }, py::arg("pmf"), py::arg("phi"));
  m.def("standard_entropy", [](const std::vector<double>& p) { return standard_entropy(p); }, py::arg("pmf"));
  m.def("iid_additive_rates", [](const std::vector<double>& p, const std::vector<double>& phi) {
    const auto r = iid_additive_rates(DiscreteModel(p, phi));
    return py::make_tuple(r.A0, r.A1);
  }, py::arg("pmf"), py::arg("phi"), "Returns (A0, A1).");
  m.def("iid_multiplicative_rates", [](const std::vector<double>& p, const std::vector<double>& phi) {
    const auto r = iid_multiplicative_rates(DiscreteModel(p, phi));
    return py::make_tuple(r.B0, r.B1);
  }, py::arg("pmf"), py::arg("phi"), "Returns (B0, B1) with WE(n) = n B1 B0^(n-1).");
  m.def("iid_additive_we", [](const std::vector<double>& p, const std::vector<double>& phi, int n) {
    return iid_additive_we(DiscreteModel(p, phi), n);
  }, py::arg("pmf"), py::arg("phi"), py::arg("n"));
  m.def("iid_multiplicative_we", [](const std::vector<double>& p, const std::vector<double>& phi, int n) {
    return iid_multiplicative_we(DiscreteModel(p, phi), n);
  }, py::arg("pmf"), py::arg("phi"), py::arg("n"));

  m.def("stationary_distribution", &stationary_distribution, py::arg("P"));
  m.def("entropy_rate", [](const Matrix& P) { return entropy_rate(FiniteMarkovModel(P)); }, py::arg("P"));
  m.def("markov_additive_we", [](const Matrix& P, const std::vector<double>& phi, int n, const std::string& start,
                                 const std::optional<Vector>& initial) {
    return exact_joint_we_additive(chain(P, initial), phi, n, parse_start(start));
  }, py::arg("P"), py::arg("phi"), py::arg("n"), py::arg("start") = "stationary", py::arg("initial") = py::none());
  m.def("markov_additive_rates", [](const Matrix& P, const std::vector<double>& phi) {
    const FiniteMarkovModel model(P);
    py::dict d;
    d["A0"] = primary_rate_additive(model, phi);
    if (std::abs(stationary_mean(model, phi)) < 1e-12) d["A1"] = secondary_rate_additive(model, phi).A1;
    return d;
  }, py::arg("P"), py::arg("phi"), "A0 always; A1 when the weight is centred under the stationary law.");
  m.def("markov_multiplicative_we", [](const Matrix& P, const std::vector<double>& phi, int n, const std::string& start,
                                       const std::optional<Vector>& initial) {
    return log_scaled(exact_joint_we_multiplicative(chain(P, initial), phi, n, parse_start(start)));
  }, py::arg("P"), py::arg("phi"), py::arg("n"), py::arg("start") = "stationary", py::arg("initial") = py::none());
  m.def("markov_multiplicative_rates", [](const Matrix& P, const std::vector<double>& phi) {
    const FiniteMarkovModel model(P);
    const auto r = primary_rate_multiplicative(model, phi);
    const auto s = secondary_rate_multiplicative(model, phi);
    py::dict d;
    d["mu"] = r.mu;
    d["B0"] = r.B0;
    d["B1"] = s.B1;
    d["B1_swapped"] = s.B1_swapped;
    return d;
  }, py::arg("P"), py::arg("phi"));
  m.def("krein_rutman", [](const Matrix& W) { return kr_dict(krein_rutman(kernel_from_matrix(W))); }, py::arg("W"),
        "Principal eigenvalue and eigenvectors of a nonnegative matrix under counting measure.");

  m.def("log_partition_function", [](const Matrix& P, const std::vector<double>& phi, int n) {
    return partition_function(FiniteMarkovModel(P), phi, n).log_abs();
  }, py::arg("P"), py::arg("phi"), py::arg("n"));
  m.def("twisted_chain", [](const Matrix& P, const std::vector<double>& phi) {
    const FiniteMarkovModel model(P);
    const auto tw = twist(model, phi, krein_rutman(build_weighted_kernel(model, phi)));
    return py::make_tuple(tw.P, tw.pi);
  }, py::arg("P"), py::arg("phi"), "Returns (transition matrix, stationary law).");
  m.def("variational_audit", [](const Matrix& P, const std::vector<double>& phi, int count, std::uint64_t seed) {
    const auto r = randomized_audit(FiniteMarkovModel(P), phi, count, seed);
    py::dict d;
    d["B0"] = r.B0;
    d["min_slack"] = r.min_slack;
    d["witness_residual"] = r.equality_witness_residual;
    std::vector<double> slack;
    for (const auto& c : r.candidates) slack.push_back(c.slack);
    d["slack"] = slack;
    return d;
  }, py::arg("P"), py::arg("phi"), py::arg("count") = 100, py::arg("seed") = 1);
  m.def("topological_entropy", [](double a, double x_max) { return topological_entropy(a, TopoDomain::standard_normal(x_max)).log_mu; },
        py::arg("a"), py::arg("x_max") = 8.0);
  m.def("topological_entropy_direct", [](double a, int n, double x_max, int intervals) {
    const auto r = topological_entropy_direct(a, n, TopoDomain::standard_normal(x_max, intervals));
    return py::make_tuple(r.step_growth, r.cesaro);
  }, py::arg("a"), py::arg("n"), py::arg("x_max") = 8.0, py::arg("intervals") = 256, "Returns (step growth, Cesaro mean).");

  m.def("gaussian_entropy", [](const Matrix& C) { return gaussian_entropy(GaussianModel::from_covariance(C)); }, py::arg("C"));
  m.def("ar1_covariance", [](double alpha, int n) { return GaussianModel::ar1(alpha, n).covariance(); }, py::arg("alpha"), py::arg("n"));
  m.def("ar1_precision", [](double alpha, int n) { return GaussianModel::ar1(alpha, n).precision(); }, py::arg("alpha"), py::arg("n"));
  m.def("gaussian_we_quadratic", [](const Matrix& C, const Matrix& A) { return we_quadratic_wf(GaussianModel::from_covariance(C), A).we; },
        py::arg("C"), py::arg("A"));
  m.def("gaussian_we_exp_quadratic", [](const Matrix& C, const Matrix& A, const Vector& t) {
    return we_exp_quadratic(GaussianModel::from_covariance(C), A, t).we;
  }, py::arg("C"), py::arg("A"), py::arg("t"));
  m.def("gaussian_we_monte_carlo", [](const Matrix& C, const std::function<double(const Vector&)>& phi, std::uint64_t samples,
                                      std::uint64_t seed, int batches) {
    MCOracleConfig cfg;
    cfg.samples = samples;
    cfg.seed = seed;
    cfg.batches = batches;
    const auto r = mc_weighted_entropy(GaussianModel::from_covariance(C), phi, cfg);
    return py::make_tuple(r.mean, r.se);
  }, py::arg("C"), py::arg("phi"), py::arg("samples") = 100'000, py::arg("seed") = 1, py::arg("batches") = 100,
     "Returns (mean, batch-means standard error).");
  m.def("ar1_log_mu", [](double alpha, const std::function<double(double)>& phi) { return ar1_log_mu(alpha, phi); },
        py::arg("alpha"), py::arg("phi"));
  m.def("ar1_multiplicative_we", [](double alpha, const std::function<double(double)>& phi, int n) {
    return log_scaled(ar1_we_multiplicative(alpha, phi, n));
  }, py::arg("alpha"), py::arg("phi"), py::arg("n"));

  m.def("simulate_markov", [](const Matrix& P, int n, std::uint64_t seed) { return simulate(FiniteMarkovModel(P), n, seed).symbols; },
        py::arg("P"), py::arg("n"), py::arg("seed"));
  m.def("simulate_ar1", [](double alpha, int n, std::uint64_t seed) { return simulate(AR1Process{alpha}, n, seed).values; },
        py::arg("alpha"), py::arg("n"), py::arg("seed"));
  m.def("markov_smb", [](const Matrix& P, int n, std::uint64_t seed) {
    const FiniteMarkovModel model(P);
    return report_dict(empirical_smb(simulate(model, n, seed), model));
  }, py::arg("P"), py::arg("n"), py::arg("seed"));
  m.def("markov_wi", [](const Matrix& P, const std::vector<double>& phi, int n, std::uint64_t seed, bool multiplicative) {
    const FiniteMarkovModel model(P);
    const auto t = simulate(model, n, seed);
    return report_dict(multiplicative ? empirical_wi_multiplicative(t, model, phi) : empirical_wi_additive(t, model, phi));
  }, py::arg("P"), py::arg("phi"), py::arg("n"), py::arg("seed"), py::arg("multiplicative") = false);
}
