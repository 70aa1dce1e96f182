#include <cmath>
#include <limits>

#include "werate/cli_runner.hpp"
#include "werate/gaussian_suite.hpp"
#include "werate/iid_rates.hpp"
#include "werate/pressure_lab.hpp"
#include "werate/trajectory_lab.hpp"

namespace werate::cli {

namespace {

// Converts information-valued quantities to the requested base.
struct Units {
  LogBase base;
  double operator()(double nats) const { return to_base(nats, base); }
};

Json number(double v) {
  if (!std::isfinite(v)) return Json(format_number(v));
  return Json(v);
}

Json vector_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v(i)));
  return a;
}

Json matrix_json(const Matrix& M) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) a.push_back(vector_json(M.row(i).transpose()));
  return a;
}

Json header(const char* command, const GlobalOptions& o) {
  Json j;
  j["command"] = command;
  j["tool_version"] = kToolVersion;
  j["log_base"] = o.log_base == LogBase::Natural ? "nat" : "bits";
  j["seed"] = o.seed;
  return j;
}

Vector to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

FiniteMarkovModel markov_from_config(Config& c) {
  Matrix P = c.get_matrix("P");
  if (c.has("lambda")) return FiniteMarkovModel(std::move(P), to_eigen(c.get_vector("lambda")));
  return FiniteMarkovModel(std::move(P));
}

Start start_from_config(Config& c) {
  const std::string s = c.get_choice("start", {"stationary", "initial", "conditional"}, "stationary");
  return s == "stationary" ? Start::Stationary : s == "initial" ? Start::Initial : Start::InitialConditional;
}

NodeFunction ar1_weight(Config& c) {
  const std::string kind = c.get_choice("phi_kind", {"square", "gauss", "constant"}, "gauss");
  const double scale = c.get_double("phi_scale", kind == "gauss" ? 0.25 : 1.0);
  if (kind == "square") return [scale](double x) { return scale * x * x; };
  if (kind == "gauss") return [scale](double x) { return std::exp(-scale * x * x); };
  return [scale](double) { return scale; };
}

}  // namespace

CommandResult cmd_iid(Config& c, const GlobalOptions& o) {
  const Units u{o.log_base};
  std::vector<double> pmf = c.get_vector("pmf");
  std::vector<double> phi = c.get_vector("phi", std::vector<double>(pmf.size(), 1.0));
  const std::string wf = c.get_choice("wf", {"additive", "multiplicative"}, "additive");
  const long long n = c.get_int("n", 0);
  const bool enumerate = c.get_bool("enumerate", false);
  const long long n_max = c.get_int("series_n_max", 0);
  c.reject_unknown();
  if (n < 0 || n_max < 0) throw ValidationError("n and series_n_max must be >= 0");

  const DiscreteModel model(pmf, phi);
  CommandResult r;
  r.report = header("iid", o);
  Json res;
  res["alphabet_size"] = model.alphabet_size();
  res["entropy"] = number(u(standard_entropy(model.pmf())));
  res["weighted_entropy"] = number(u(weighted_entropy(model)));
  res["mean_weight"] = number(model.mean_weight());

  const bool add = wf == "additive";
  if (add) {
    const auto rates = iid_additive_rates(model);
    res["A0"] = number(u(rates.A0));
    res["A1"] = number(u(rates.A1));
  } else {
    const auto rates = iid_multiplicative_rates(model);
    res["B0"] = number(rates.B0);
    res["B0_log"] = number(u(rates.B0_log));
    res["B1"] = number(u(rates.B1));
    res["zero_factor"] = rates.zero_factor;
  }
  if (n > 0) {
    res["n"] = n;
    const double we = add ? iid_additive_we(model, static_cast<int>(n)) : iid_multiplicative_we(model, static_cast<int>(n));
    res["we_closed_form"] = number(u(we));
    if (enumerate) {
      const int k = static_cast<int>(model.alphabet_size());
      guarded_string_count(model.alphabet_size(), static_cast<int>(n));
      const auto joint = product_pmf(model.pmf(), static_cast<int>(n));
      const JointWF f = add ? JointWF::additive(phi) : JointWF::multiplicative(phi);
      res["we_enumerated"] = number(u(joint_weighted_entropy_enumerated(joint, f, k, static_cast<int>(n))));
    }
  }
  if (n_max > 0) {
    CsvTable t{"series", {"n", "we"}, {}};
    for (int m = 1; m <= n_max; ++m)
      t.rows.push_back({std::to_string(m), format_number(u(add ? iid_additive_we(model, m) : iid_multiplicative_we(model, m)))});
    r.tables.push_back(std::move(t));
  }
  r.report["results"] = res;
  return r;
}

CommandResult cmd_markov(Config& c, const GlobalOptions& o) {
  const Units u{o.log_base};
  const FiniteMarkovModel model = markov_from_config(c);
  const std::vector<double> phi = c.get_vector("phi", std::vector<double>(model.state_count(), 1.0));
  const std::string wf = c.get_choice("wf", {"additive", "multiplicative"}, "additive");
  const Start start = start_from_config(c);
  const long long n = c.get_int("n", 0);
  const long long n_max = c.get_int("series_n_max", 0);
  const double a1_tol = wf == "additive" ? c.get_double("a1_tol", 1e-14) : 0.0;
  c.reject_unknown();
  if (n < 0 || n_max < 0) throw ValidationError("n and series_n_max must be >= 0");

  CommandResult r;
  r.report = header("markov", o);
  Json res;
  res["states"] = model.state_count();
  res["stationary"] = vector_json(model.pi());
  res["entropy_rate"] = number(u(entropy_rate(model)));
  const auto doeblin = doeblin_report(model);
  res["doeblin_rho"] = number(doeblin.rho);
  res["doeblin_k"] = doeblin.k ? Json(*doeblin.k) : Json(nullptr);

  if (wf == "additive") {
    const double mean = stationary_mean(model, phi);
    res["stationary_mean_weight"] = number(mean);
    res["A0"] = number(u(primary_rate_additive(model, phi)));
    if (std::abs(mean) <= 1e-10 && doeblin.rho > 0.0) {
      const auto a1 = secondary_rate_additive(model, phi, a1_tol);
      res["A1"] = number(u(a1.A1));
      res["A1_terms"] = a1.terms;
      res["A1_tail_bound"] = number(u(a1.tail_bound));
    } else {
      res["A1"] = nullptr;
      res["A1_note"] = "series needs a centred weight and all transition probabilities positive";
    }
    if (n > 0) {
      res["n"] = n;
      res["we_exact"] = number(u(exact_joint_we_additive(model, phi, static_cast<int>(n), start)));
    }
    if (n_max > 0) {
      CsvTable t{"series", {"n", "we", "we_over_n2"}, {}};
      for (int m = 1; m <= n_max; ++m) {
        const double we = exact_joint_we_additive(model, phi, m, start);
        t.rows.push_back({std::to_string(m), format_number(u(we)), format_number(u(we) / (double(m) * m))});
      }
      r.tables.push_back(std::move(t));
    }
  } else {
    const auto rate = primary_rate_multiplicative(model, phi);
    res["mu"] = number(rate.mu);
    res["B0"] = number(u(rate.B0));
    res["operator_norm"] = number(rate.norm);
    res["gap_estimate"] = number(rate.kr.gap_estimate);
    res["right_eigenvector"] = vector_json(rate.kr.phi_right);
    res["left_eigenvector"] = vector_json(rate.kr.psi_left);
    const auto b1 = secondary_rate_multiplicative(model, phi);
    res["B1"] = number(u(b1.B1));
    res["B1_swapped_pairing"] = number(u(b1.B1_swapped));
    if (n >= 2) {
      const auto we = exact_joint_we_multiplicative(model, phi, static_cast<int>(n), start);
      res["n"] = n;
      res["we_exact"] = number(u(we.value()));
      res["log_we_exact"] = number(u(we.log_abs()));
    }
    if (n_max >= 2) {
      CsvTable t{"series", {"n", "log_we", "log_we_over_n_minus_B0", "we_over_n_mu_n"}, {}};
      for (int m = 2; m <= n_max; ++m) {
        const auto we = exact_joint_we_multiplicative(model, phi, m, start);
        const double lw = we.log_abs();
        t.rows.push_back({std::to_string(m), format_number(u(lw)), format_number(u(lw / m - rate.B0)),
                          format_number(u(std::exp(lw - std::log(m) - m * rate.B0)))});
      }
      r.tables.push_back(std::move(t));
    }
  }
  r.report["results"] = res;
  return r;
}

CommandResult cmd_gaussian(Config& c, const GlobalOptions& o) {
  const Units u{o.log_base};
  const std::string cov = c.get_choice("cov", {"explicit", "ar1"}, "explicit");
  const std::string wf = c.get_choice("wf", {"constant", "quadratic", "exp_quadratic", "exp_linear", "ar1_product"});

  CommandResult r;
  r.report = header("gaussian", o);
  Json res;

  if (wf == "ar1_product") {
    if (cov != "ar1") throw ValidationError("wf = ar1_product needs cov = ar1");
    const double alpha = c.get_double("alpha");
    const long long n = c.get_int("n");
    const NodeFunction phi = ar1_weight(c);
    AR1Quadrature quad;
    quad.nodes = static_cast<int>(c.get_int("nodes", quad.nodes));
    quad.x_max_sd = c.get_double("x_max_sd", quad.x_max_sd);
    c.reject_unknown();
    if (n < 2) throw ValidationError("n must be >= 2");
    const auto we = ar1_we_multiplicative(alpha, phi, static_cast<int>(n), quad);
    const double log_mu = ar1_log_mu(alpha, phi, quad);
    res["n"] = n;
    res["we"] = number(u(we.value()));
    res["log_we"] = number(u(we.log_abs()));
    res["log_mu"] = number(u(log_mu));
    res["log_we_over_n_minus_log_mu"] = number(u(we.log_abs() / n - log_mu));
    r.report["results"] = res;
    return r;
  }

  std::optional<GaussianModel> model;
  if (cov == "ar1") {
    const double alpha = c.get_double("alpha");
    const long long n = c.get_int("n");
    if (n < 1 || n > 5000) throw ValidationError("n must be in 1..5000");
    model = GaussianModel::ar1(alpha, static_cast<int>(n));
    res["precision_determinant"] = number(ar1_precision_determinant(alpha, static_cast<int>(n)));
  } else {
    model = GaussianModel::from_covariance(c.get_matrix("C"));
  }
  const int n = model->dimension();
  GaussianWFSpec spec;
  if (wf == "constant") spec = GaussianWFSpec::constant_times_n(c.get_double("wf_alpha", 1.0));
  else if (wf == "quadratic") spec = GaussianWFSpec::quadratic(c.get_matrix("A"));
  else if (wf == "exp_quadratic") spec = GaussianWFSpec::exp_quadratic(c.get_matrix("A"), to_eigen(c.get_vector("t")));
  else spec = GaussianWFSpec::exp_linear(to_eigen(c.get_vector("t")));
  MCOracleConfig mc;
  mc.samples = static_cast<std::uint64_t>(c.get_int("mc_samples", 0));
  mc.batches = static_cast<int>(c.get_int("mc_batches", 100));
  mc.seed = o.seed;
  mc.threads = o.threads;
  c.reject_unknown();

  res["n"] = n;
  res["entropy"] = number(u(gaussian_entropy(*model)));
  const double value = we_closed_form(*model, spec);
  res["value"] = number(u(value));
  if (spec.kind == GaussianWFSpec::Kind::Quadratic) {
    const auto q = we_quadratic_wf(*model, spec.A);
    res["wi_offset"] = number(u(q.wi_offset));
    res["trace_AC"] = number(q.trace_AC);
    res["trace_ACAC"] = number(q.trace_ACAC);
  }
  if (spec.kind == GaussianWFSpec::Kind::ExpQuadratic || spec.kind == GaussianWFSpec::Kind::ExpLinear) {
    const Matrix A = spec.kind == GaussianWFSpec::Kind::ExpQuadratic ? spec.A : Matrix::Zero(n, n);
    const auto e = we_exp_quadratic(*model, A, spec.t);
    res["mean_weight"] = number(e.E_phi);
    res["trace_term"] = number(e.trace_term);
    res["shift_term"] = number(e.shift_term);
  }
  if (mc.samples > 0) {
    const auto est = mc_weighted_entropy(*model, spec, mc);
    res["mc_estimate"] = number(u(est.mean));
    res["mc_se"] = number(u(est.se));
    res["mc_samples"] = est.samples;
    res["mc_z"] = number(est.se > 0.0 ? (value - est.mean) / est.se : 0.0);
  }
  r.report["results"] = res;
  return r;
}

CommandResult cmd_pressure(Config& c, const GlobalOptions& o) {
  const Units u{o.log_base};
  const std::string mode = c.get_choice("mode", {"markov", "topological"}, "markov");
  CommandResult r;
  r.report = header("pressure", o);
  Json res;

  if (mode == "topological") {
    const double a = c.get_double("a");
    const std::string ref = c.get_choice("reference", {"normal", "flat"}, "normal");
    TopoDomain dom = ref == "normal" ? TopoDomain::standard_normal(c.get_double("x_max", 8.0))
                                     : TopoDomain::flat(c.get_double("lo"), c.get_double("hi"));
    dom.intervals = static_cast<int>(c.get_int("intervals", 256));
    const double tol = c.get_double("tol", 1e-8);
    const long long direct_n = c.get_int("direct_n", 40);
    c.reject_unknown();
    if (direct_n < 2) throw ValidationError("direct_n must be >= 2");
    const auto kr = topological_entropy(a, dom, tol);
    const auto direct = topological_entropy_direct(a, static_cast<int>(direct_n), dom);
    res["a"] = number(a);
    res["topological_entropy"] = number(u(kr.log_mu));
    res["refinement_converged"] = kr.refinement.converged;
    Json levels = Json::array();
    for (std::size_t i = 0; i < kr.refinement.sizes.size(); ++i)
      levels.push_back({{"intervals", kr.refinement.sizes[i]}, {"mu", number(kr.refinement.mu[i])}});
    res["refinement"] = levels;
    res["direct_step_growth"] = number(u(direct.step_growth));
    res["direct_cesaro"] = number(u(direct.cesaro));
    CsvTable t{"volume", {"n", "log_volume"}, {}};
    for (std::size_t i = 0; i < direct.log_volume.size(); ++i)
      t.rows.push_back({std::to_string(i + 1), format_number(u(direct.log_volume[i]))});
    r.tables.push_back(std::move(t));
    r.report["results"] = res;
    return r;
  }

  const FiniteMarkovModel model = markov_from_config(c);
  const std::vector<double> phi = c.get_vector("phi");
  const long long n_max = c.get_int("n_max", 50);
  const long long audit_count = c.get_int("audit_count", 100);
  const double concentration = c.get_double("audit_concentration", 20.0);
  const long long kl_n = c.get_int("kl_n", 10);
  c.reject_unknown();
  if (n_max < 2 || kl_n < 1 || audit_count < 0) throw ValidationError("need n_max >= 2, kl_n >= 1, audit_count >= 0");

  const auto rate = primary_rate_multiplicative(model, phi);
  const auto tw = twist(model, phi, rate.kr);
  const auto audit = randomized_audit(model, phi, static_cast<int>(audit_count), o.seed, concentration);
  const auto series = pressure_estimate(model, phi, static_cast<int>(n_max));
  const double kl = twisted_tilted_kl(model, phi, rate.kr, static_cast<int>(kl_n));

  res["mu"] = number(rate.mu);
  res["B0"] = number(u(rate.B0));
  res["right_eigenvector"] = vector_json(rate.kr.phi_right);
  res["left_eigenvector"] = vector_json(rate.kr.psi_left);
  res["twisted_chain"] = matrix_json(tw.P);
  res["twisted_stationary"] = vector_json(tw.pi);
  res["twisted_row_sum_defect"] = number(tw.row_sum_defect());
  res["twisted_stationarity_defect"] = number(tw.stationarity_defect());
  res["audit_candidates"] = audit_count;
  res["audit_min_slack"] = number(u(audit.min_slack));
  res["equality_witness_residual"] = number(u(audit.equality_witness_residual));
  res["kl_n"] = kl_n;
  res["twisted_tilted_kl"] = number(u(kl));
  res["pressure_cesaro_at_n_max"] = number(u(series.cesaro.back()));
  CsvTable t{"pressure", {"n", "cesaro", "slope"}, {}};
  for (std::size_t i = 0; i < series.n.size(); ++i)
    t.rows.push_back({std::to_string(series.n[i]), format_number(u(series.cesaro[i])), format_number(u(series.slope[i]))});
  r.tables.push_back(std::move(t));
  r.report["results"] = res;
  return r;
}

CommandResult cmd_simulate(Config& c, const GlobalOptions& o) {
  const Units u{o.log_base};
  const std::string process = c.get_choice("process", {"markov", "ar1"}, "markov");
  const std::string stat = c.get_choice("statistic", {"smb", "wi_additive", "wi_multiplicative", "all"}, "all");
  const long long n = c.get_int("n", 100000);
  const long long replicates = c.get_int("replicates", 16);
  if (n < 1 || replicates < 1) throw ValidationError("n and replicates must be >= 1");
  std::vector<std::uint64_t> seeds;
  for (long long i = 0; i < replicates; ++i) seeds.push_back(o.seed + static_cast<std::uint64_t>(i));

  std::vector<std::string> stats;
  if (stat == "all") stats = {"smb", "wi_additive", "wi_multiplicative"};
  else stats = {stat};

  std::vector<std::vector<ConvergenceReport>> all;
  if (process == "markov") {
    const FiniteMarkovModel model = markov_from_config(c);
    const std::vector<double> phi = c.get_vector("phi", std::vector<double>(model.state_count(), 1.0));
    c.reject_unknown();
    for (const auto& s : stats)
      all.push_back(run_replicates(
          seeds,
          [&](std::uint64_t seed) {
            const Trajectory t = simulate(model, static_cast<int>(n), seed);
            if (s == "smb") return empirical_smb(t, model);
            if (s == "wi_additive") return empirical_wi_additive(t, model, phi);
            return empirical_wi_multiplicative(t, model, phi);
          },
          o.threads));
  } else {
    const AR1Process proc{c.get_double("alpha", 0.5)};
    const NodeFunction phi = ar1_weight(c);
    c.reject_unknown();
    for (const auto& s : stats)
      all.push_back(run_replicates(
          seeds,
          [&](std::uint64_t seed) {
            const Trajectory t = simulate(proc, static_cast<int>(n), seed);
            if (s == "smb") return empirical_smb(t, proc);
            if (s == "wi_additive") return empirical_wi_additive(t, proc, phi);
            return empirical_wi_multiplicative(t, proc, phi);
          },
          o.threads));
  }

  CommandResult r;
  r.report = header("simulate", o);
  Json res;
  res["n"] = n;
  res["replicates"] = replicates;
  CsvTable t{"convergence", {"seed", "n_checkpoint", "statistic", "value", "target", "abs_error"}, {}};
  for (const auto& reps : all) {
    const auto s = summarize(reps);
    auto cv = [&](double v) { return u(v); };
    Json j;
    j["target"] = number(cv(s.target));
    j["mean"] = number(cv(s.mean));
    j["se"] = number(cv(s.se));
    j["max_abs_error"] = number(cv(s.max_abs_error));
    j["max_relative_error"] = number(s.max_relative_error);
    if (s.statistic == "wi_multiplicative") j["we_rate"] = number(cv(reps.front().we_rate));
    res[s.statistic] = j;
    for (const auto& rep : reps)
      for (std::size_t i = 0; i < rep.checkpoints.size(); ++i) {
        const double v = rep.skipped[i] ? std::numeric_limits<double>::quiet_NaN() : cv(rep.estimates[i]);
        t.rows.push_back({std::to_string(rep.seed), std::to_string(rep.checkpoints[i]), rep.statistic,
                          format_number(v), format_number(cv(rep.target)), format_number(std::abs(v - cv(rep.target)))});
      }
  }
  r.tables.push_back(std::move(t));
  r.report["results"] = res;
  return r;
}

}  // namespace werate::cli
