#include "expconc/runner.hpp"

#include "expconc/concentration.hpp"
#include "expconc/experiments.hpp"
#include "expconc/expconcavity.hpp"
#include "expconc/functional.hpp"
#include "expconc/io.hpp"
#include "expconc/plot.hpp"
#include "expconc/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

namespace expconc {
namespace {

// ---------------------------------------------------------------------------
// typed access to configuration objects; every failure names its key

std::string join(const std::string& where, const std::string& key) { return where.empty() ? key : where + "." + key; }

[[noreturn]] void bad(const std::string& key, const std::string& message) { throw ConfigError(key + ": " + message); }

const Json& require(const Json& obj, const std::string& key, const std::string& where) {
  if (!obj.is_object()) bad(where.empty() ? "config" : where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) bad(join(where, key), "missing");
  return *it;
}

double as_number(const Json& v, const std::string& key) {
  if (!v.is_number()) bad(key, "expected a number");
  return v.get<double>();
}

std::uint64_t as_count(const Json& v, const std::string& key) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  if (v.is_number_float()) {
    const double x = v.get<double>();
    if (x >= 0.0 && x == std::floor(x) && x < 1.8e19) return static_cast<std::uint64_t>(x);
  }
  bad(key, "expected a nonnegative integer");
}

double number_or(const Json& obj, const std::string& key, const std::string& where, double fallback) {
  auto it = obj.find(key);
  return it == obj.end() ? fallback : as_number(*it, join(where, key));
}

std::uint64_t count_or(const Json& obj, const std::string& key, const std::string& where, std::uint64_t fallback) {
  auto it = obj.find(key);
  return it == obj.end() ? fallback : as_count(*it, join(where, key));
}

std::optional<double> optional_number(const Json& obj, const std::string& key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  return as_number(*it, join(where, key));
}

std::string string_or(const Json& obj, const std::string& key, const std::string& where, const std::string& fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_string()) bad(join(where, key), "expected a string");
  return it->get<std::string>();
}

std::vector<double> number_list(const Json& v, const std::string& key) {
  if (!v.is_array()) bad(key, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) out.push_back(as_number(x, key));
  return out;
}

Vector vector_from(const Json& v, const std::string& key) {
  const auto xs = number_list(v, key);
  return Eigen::Map<const Vector>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

Matrix matrix_from(const Json& v, const std::string& key) {
  if (!v.is_array() || v.empty()) bad(key, "expected a nonempty array of rows");
  const std::size_t cols = v.front().is_array() ? v.front().size() : 0;
  if (cols == 0) bad(key, "rows must be nonempty arrays");
  Matrix m(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto row = number_list(v[i], key);
    if (row.size() != cols) bad(key, "rows differ in length");
    for (std::size_t j = 0; j < cols; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
  }
  return m;
}

/// Strictly increasing, nonnegative, finite.
std::vector<double> increasing_grid(const Json& config, const std::string& key) {
  const auto grid = number_list(require(config, key, ""), key);
  if (grid.empty()) bad(key, "must not be empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0) || !std::isfinite(grid[i])) bad(key, "entries must be finite and nonnegative");
    if (i > 0 && !(grid[i] > grid[i - 1])) bad(key, "must be strictly increasing");
  }
  return grid;
}

void check_keys(const Json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) bad(join(where, it.key()), "unknown key");
}

// ---------------------------------------------------------------------------
// sampling

struct SamplerSpec {
  std::optional<SamplingMethod> method;  ///< empty: exact when available, else MCMC
  std::size_t n = 100000;
  ChainConfig chain;
};

SamplerSpec parse_sampler(const Json& config, std::size_t default_n) {
  SamplerSpec s;
  s.n = default_n;
  auto it = config.find("sampler");
  if (it == config.end()) return s;
  const Json& j = *it;
  const std::string where = "sampler";
  if (!j.is_object()) bad(where, "expected an object");
  check_keys(j, {"method", "n", "step_size", "burn_in", "thinning", "n_chains", "target_acceptance"}, where);
  const std::string method = string_or(j, "method", where, "auto");
  if (method == "exact") {
    s.method = SamplingMethod::exact_inverse_cdf;
  } else if (method != "auto") {
    s.method = parse_method(method);
    if (!s.method) bad("sampler.method", "unknown method '" + method + "'");
  }
  s.n = count_or(j, "n", where, default_n);
  if (s.n == 0) bad("sampler.n", "must be positive");
  s.chain.step_size = number_or(j, "step_size", where, s.chain.step_size);
  s.chain.burn_in = count_or(j, "burn_in", where, s.chain.burn_in);
  s.chain.thinning = count_or(j, "thinning", where, s.chain.thinning);
  s.chain.n_chains = count_or(j, "n_chains", where, s.chain.n_chains);
  s.chain.target_acceptance = number_or(j, "target_acceptance", where, s.chain.target_acceptance);
  try {
    s.chain.validate();
  } catch (const ConfigError& e) {
    bad(where, e.what());
  }
  return s;
}

bool has_exact_sampler(const Potential& p) { return p.fully_factorized() || p.dimension() == 1; }

SampleBatch draw(const Potential& p, const SamplerSpec& s, std::uint64_t seed) {
  SamplingMethod m;
  if (s.method) {
    m = *s.method;
  } else if (has_exact_sampler(p)) {
    m = SamplingMethod::exact_inverse_cdf;
  } else {
    m = p.support().bounded() ? SamplingMethod::hit_and_run : SamplingMethod::mala;
  }
  switch (m) {
    case SamplingMethod::exact_inverse_cdf:
    case SamplingMethod::exact_gaussian:
    case SamplingMethod::exact_exponential:
      if (!has_exact_sampler(p)) bad("sampler.method", "no exact sampler for this potential");
      return sample_exact(p, s.n, seed);
    default:
      return sample_mcmc(p, s.n, m, s.chain, seed);
  }
}

Json sampler_json(const SampleBatch& b) {
  return {{"method", method_name(b.method)}, {"n", b.size()}, {"diagnostics", to_json(b.diagnostics)}};
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

std::string fmt(double x) { return io::format_double(x); }

void add_verdict(ExperimentOutput& out, std::string name, bool passed, std::string detail) {
  out.verdicts.push_back({std::move(name), passed, std::move(detail)});
}

plot::Figure tail_figure(const TailReport& r, const std::string& title) {
  plot::Figure f{title, "t", "P(|V - EV| > t)", true, {}};
  f.series.push_back({"empirical", r.t_grid, r.empirical_survival, false});
  f.series.push_back({"99% UCB", r.t_grid, r.survival_ucb, false});
  for (std::size_t j = 0; j < r.bounds.size(); ++j) {
    std::vector<double> capped = r.bound_values[j];
    for (double& v : capped) v = std::min(v, 1.0);
    f.series.push_back({r.bounds[j].label(), r.t_grid, capped, true});
  }
  return f;
}

void note_illustrative(ExperimentOutput& out, const std::vector<BoundSpec>& bounds) {
  for (const auto& b : bounds)
    if (b.kind == BoundSpec::Kind::log_concave)
      out.annotations.push_back(b.label() + ": constants c1, c2 are illustrative, not proven values");
}

std::optional<double> declared_eta(const Json& config, const Potential& p) {
  if (auto e = optional_number(config, "eta", "")) {
    if (!(*e > 0.0)) bad("eta", "must be positive");
    return e;
  }
  if (p.known_eta() && *p.known_eta() > 0.0) return p.known_eta();
  return std::nullopt;
}

void maybe_certify(const Json& config, const Potential& p, std::uint64_t seed, ExperimentOutput& out) {
  auto it = config.find("certify");
  if (it == config.end()) return;
  if (!it->is_object()) bad("certify", "expected an object");
  check_keys(*it, {"samples", "grid"}, "certify");
  const auto samples = count_or(*it, "samples", "certify", 200);
  const auto grid = count_or(*it, "grid", "certify", 64);
  const auto points = certification_points(p, samples, grid, seed);
  const auto cert = certify(p, points, p.known_eta());
  out.payload["certificate"] = to_json(cert);
  if (p.known_eta())
    add_verdict(out, "eta certificate", cert.passed(),
                std::to_string(cert.violations.size()) + " violations of declared eta " + fmt(*p.known_eta()) +
                    " over " + std::to_string(cert.points.size()) + " points");
}

// ---------------------------------------------------------------------------
// experiments

ExperimentOutput run_tails(const Json& config, std::uint64_t seed, bool plot) {
  ExperimentOutput out;
  const Potential p = parse_potential(require(config, "potential", ""));
  const auto grid = increasing_grid(config, "t_grid");
  std::vector<BoundSpec> bounds;
  if (auto it = config.find("bounds"); it != config.end()) {
    if (!it->is_array()) bad("bounds", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i)
      bounds.push_back(parse_bound((*it)[i], "bounds[" + std::to_string(i) + "]"));
  } else if (auto eta = declared_eta(config, p)) {
    bounds.push_back(bound_exp_concave(*eta));
  } else {
    bounds.push_back(bound_log_concave(p.dimension()));
  }
  for (const auto& b : bounds)
    if (!b.is_tail()) bad("bounds", "mgf_product is not a tail bound");
  const double confidence = number_or(config, "confidence", "", 0.99);
  if (!(confidence > 0.0 && confidence < 1.0)) bad("confidence", "must lie in (0, 1)");

  const auto batch = draw(p, parse_sampler(config, 100000), seed);
  const auto report = estimate_tails(batch, grid, bounds, confidence);
  out.payload["potential"] = p.name();
  out.payload["sampler"] = sampler_json(batch);
  out.payload["tails"] = to_json(report);
  for (std::size_t j = 0; j < bounds.size(); ++j)
    add_verdict(out, "UCB dominated by " + bounds[j].label(), report.dominated_by(j),
                "Clopper-Pearson UCB at confidence " + fmt(confidence) + " against the bound wherever it is below 1");
  note_illustrative(out, bounds);
  maybe_certify(config, p, seed + 1, out);
  out.files.emplace_back("tails.csv", report.csv());
  if (plot) out.files.emplace_back("tails.svg", plot::render_svg(tail_figure(report, "Tail of V under " + p.name())));
  return out;
}

ExperimentOutput run_variance(const Json& config, std::uint64_t seed, bool) {
  ExperimentOutput out;
  const Potential p = parse_potential(require(config, "potential", ""));
  const auto eta = declared_eta(config, p);
  const auto batch = draw(p, parse_sampler(config, 100000), seed);
  const auto report = estimate_variance_bounds(batch, eta, p.dimension());
  out.payload["potential"] = p.name();
  out.payload["sampler"] = sampler_json(batch);
  out.payload["variance"] = to_json(report);
  add_verdict(out, "Var(V) <= d", report.within_dimension,
              "variance " + fmt(report.variance.value) + " against d = " + std::to_string(p.dimension()) +
                  " with 4 standard errors of allowance");
  if (report.within_inverse_eta)
    add_verdict(out, "Var(V) <= 1/eta", *report.within_inverse_eta,
                "variance " + fmt(report.variance.value) + " against 1/eta = " + fmt(1.0 / *eta));
  maybe_certify(config, p, seed + 1, out);
  std::string csv = io::csv_row(std::vector<std::string>{"variance", "standard_error", "dimension", "inverse_eta"});
  csv += io::csv_row(std::vector<std::string>{fmt(report.variance.value), fmt(report.variance.standard_error),
                                              std::to_string(p.dimension()), eta ? fmt(1.0 / *eta) : ""});
  out.files.emplace_back("variance.csv", csv);
  return out;
}

ExperimentOutput run_mgf(const Json& config, std::uint64_t seed, bool) {
  ExperimentOutput out;
  const Potential p = parse_potential(require(config, "potential", ""));
  const auto eta = declared_eta(config, p);
  if (!eta) bad("eta", "mgf needs a declared eta");
  const auto lambdas = number_list(require(config, "lambdas", ""), "lambdas");
  if (lambdas.empty()) bad("lambdas", "must not be empty");
  for (double l : lambdas)
    if (!(l >= 0.0) || !std::isfinite(l)) bad("lambdas", "entries must be finite and nonnegative");
  const auto terms = count_or(config, "terms", "", 60);
  if (terms == 0) bad("terms", "must be positive");

  const auto batch = draw(p, parse_sampler(config, 100000), seed);
  std::string csv = io::csv_row(std::vector<std::string>{"lambda", "estimate", "standard_error", "product_partial",
                                                         "product_bound", "recursion_bound"});
  Json rows = Json::array();
  bool literal_exceeded = false;
  for (double lambda : lambdas) {
    const auto e = estimate_mgf(batch, lambda);
    const bool finite = lambda * lambda < 16.0 * *eta;
    const bool valid = lambda * lambda < 4.0 * *eta;
    const double partial = finite ? mgf_product_partial(lambda, *eta, terms) : INFINITY;
    const double bound = finite ? mgf_product_bound(lambda, *eta, terms) : INFINITY;
    // the first halving step of the recursion contributes (1 - lambda^2 / (4 eta))^{-1}
    const double recursion = valid ? bound / (1.0 - lambda * lambda / (4.0 * *eta)) : INFINITY;
    csv += io::csv_row(std::vector<std::string>{fmt(lambda), fmt(e.value), fmt(e.standard_error), fmt(partial),
                                                fmt(bound), fmt(recursion)});
    rows.push_back({{"lambda", number(lambda)},
                    {"estimate", to_json(e)},
                    {"product_partial", number(partial)},
                    {"product_bound", number(bound)},
                    {"recursion_bound", number(recursion)}});
    if (valid) {
      add_verdict(out, "MGF at lambda=" + fmt(lambda) + " below recursion bound",
                  e.value - 4.0 * e.standard_error <= recursion,
                  "estimate " + fmt(e.value) + " (s.e. " + fmt(e.standard_error) + ") against " + fmt(recursion));
      literal_exceeded = literal_exceeded || e.value - 4.0 * e.standard_error > bound;
    }
  }
  if (literal_exceeded)
    out.annotations.push_back("the estimate exceeds the product over k >= 1 by more than 4 s.e. at some lambda");
  if (std::any_of(lambdas.begin(), lambdas.end(), [&](double l) { return l * l >= 4.0 * *eta; }))
    out.annotations.push_back("bounds are checked only for lambda^2 < 4 eta, where the recursion is valid");
  out.payload["potential"] = p.name();
  out.payload["eta"] = number(*eta);
  out.payload["terms"] = terms;
  out.payload["sampler"] = sampler_json(batch);
  out.payload["mgf"] = std::move(rows);
  out.files.emplace_back("mgf.csv", csv);
  return out;
}

ExperimentOutput run_bl_check(const Json& config, std::uint64_t seed, bool) {
  ExperimentOutput out;
  const Potential p = parse_potential(require(config, "potential", ""));
  const Json& functions = require(config, "functions", "");
  if (!functions.is_array() || functions.empty()) bad("functions", "expected a nonempty array");
  std::string method = string_or(config, "method", "", "both");
  if (method != "quadrature" && method != "montecarlo" && method != "both")
    bad("method", "expected quadrature, montecarlo or both");
  const bool quad_possible = p.dimension() <= 3 && (p.support().kind() == SupportSpec::Kind::full ||
                                                    p.support().kind() == SupportSpec::Kind::box);
  if (method == "quadrature" && !quad_possible) bad("method", "quadrature needs d <= 3 and an interval or box support");
  const bool use_quad = method != "montecarlo" && quad_possible;
  const bool use_mc = method != "quadrature";

  std::optional<SampleBatch> batch;
  if (use_mc) batch = draw(p, parse_sampler(config, 100000), seed);

  std::string csv = io::csv_row(
      std::vector<std::string>{"function", "method", "lhs", "lhs_se", "rhs", "rhs_se", "passed"});
  Json rows = Json::array();
  for (std::size_t i = 0; i < functions.size(); ++i) {
    const std::string where = "functions[" + std::to_string(i) + "]";
    const Json& fj = functions[i];
    if (!fj.is_object()) bad(where, "expected an object");
    check_keys(fj, {"name", "c"}, where);
    const std::string name = string_or(fj, "name", where, "");
    Vector c = Vector::Ones(p.dimension());
    if (auto it = fj.find("c"); it != fj.end()) c = vector_from(*it, join(where, "c"));
    if (c.size() != p.dimension()) bad(join(where, "c"), "length must equal the dimension");
    TestFunction f;
    try {
      f = test_function::make(name, c);
    } catch (const ConfigError& e) {
      bad(join(where, "name"), e.what());
    }
    Json row = {{"function", f.label}};
    if (use_quad) {
      const auto r = bl_check_quadrature(p, f);
      row["quadrature"] = to_json(r);
      csv += io::csv_row(std::vector<std::string>{f.label, "quadrature", fmt(r.lhs), "0", fmt(r.rhs), "0", bool_text(r.holds)});
      add_verdict(out, "Brascamp-Lieb by quadrature for " + f.label, r.holds,
                  "Var(f) = " + fmt(r.lhs) + ", weighted gradient term = " + fmt(r.rhs));
    }
    if (use_mc) {
      const auto r = bl_check_montecarlo(p, f, *batch);
      row["montecarlo"] = to_json(r);
      csv += io::csv_row(std::vector<std::string>{f.label, "montecarlo", fmt(r.lhs.value), fmt(r.lhs.standard_error),
                                                  fmt(r.rhs.value), fmt(r.rhs.standard_error), bool_text(!r.violation)});
      add_verdict(out, "Brascamp-Lieb by Monte Carlo for " + f.label, !r.violation,
                  "lhs " + fmt(r.lhs.value) + " against rhs " + fmt(r.rhs.value) + " within 4 combined s.e.");
    }
    rows.push_back(std::move(row));
  }
  out.payload["potential"] = p.name();
  if (batch) out.payload["sampler"] = sampler_json(*batch);
  out.payload["checks"] = std::move(rows);
  out.files.emplace_back("bl_check.csv", csv);
  return out;
}

ExperimentOutput run_counterexample(const Json& config, std::uint64_t, bool plot) {
  ExperimentOutput out;
  const double lambda = as_number(require(config, "lambda", ""), "lambda");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) bad("lambda", "must be finite and nonnegative");
  std::vector<double> truncations = {1e-2, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12};
  if (auto it = config.find("truncations"); it != config.end()) truncations = number_list(*it, "truncations");
  if (truncations.empty()) bad("truncations", "must not be empty");
  for (std::size_t i = 0; i < truncations.size(); ++i) {
    if (!(truncations[i] > 0.0 && truncations[i] < 1.0)) bad("truncations", "entries must lie in (0, 1)");
    if (i > 0 && !(truncations[i] < truncations[i - 1])) bad("truncations", "must be strictly decreasing");
  }
  const auto values = counterexample_divergence(lambda, truncations);
  bool increasing = true;
  for (std::size_t i = 1; i < values.size(); ++i) increasing = increasing && values[i] > values[i - 1];
  out.payload["lambda"] = number(lambda);
  out.payload["truncations"] = vector_json(truncations);
  out.payload["log_integrals"] = vector_json(values);
  if (lambda > 0.0) {
    add_verdict(out, "truncated integral grows as the truncation shrinks", increasing,
                "log integrals " + fmt(values.front()) + " ... " + fmt(values.back()));
  } else {
    const double limit = std::log(4.0 / 9.0);
    const bool close = std::abs(std::exp(values.back()) - 4.0 / 9.0) <= 1e-6;
    add_verdict(out, "lambda = 0 integral approaches 4/9", close,
                "integral " + fmt(std::exp(values.back())) + ", log limit " + fmt(limit));
  }
  out.files.emplace_back("counterexample.csv", counterexample_csv(truncations, values));
  if (plot) {
    std::vector<double> x;
    for (double a : truncations) x.push_back(-std::log10(a));
    plot::Figure f{"Truncated integral, lambda = " + fmt(lambda), "-log10(truncation)", "log integral", false, {}};
    f.series.push_back({"log integral", x, values, false});
    out.files.emplace_back("counterexample.svg", plot::render_svg(f));
  }
  return out;
}

std::vector<Potential> parse_losses(const Json& config, std::size_t rounds, std::uint64_t seed) {
  const Json& spec = require(config, "losses", "");
  std::vector<Potential> losses;
  if (spec.is_array()) {
    for (std::size_t i = 0; i < spec.size(); ++i)
      losses.push_back(parse_potential(spec[i], "losses[" + std::to_string(i) + "]"));
  } else if (spec.is_object() && spec.contains("portfolio")) {
    check_keys(spec, {"portfolio"}, "losses");
    const Matrix rows = matrix_from(spec["portfolio"], "losses.portfolio");
    for (Eigen::Index i = 0; i < rows.rows(); ++i) losses.push_back(builtin::portfolio_log_loss(rows.row(i)));
  } else if (spec.is_object() && spec.contains("random_portfolio")) {
    check_keys(spec, {"random_portfolio"}, "losses");
    const Json& r = spec["random_portfolio"];
    const std::string where = "losses.random_portfolio";
    if (!r.is_object()) bad(where, "expected an object");
    check_keys(r, {"low", "high"}, where);
    const Vector low = vector_from(require(r, "low", where), join(where, "low"));
    const Vector high = vector_from(require(r, "high", where), join(where, "high"));
    if (low.size() < 2 || low.size() != high.size()) bad(where, "low and high need the same length, at least 2");
    if (!((low.array() > 0.0).all() && (high.array() >= low.array()).all()))
      bad(where, "need 0 < low <= high for every asset");
    CounterRng rng(seed, 0xfeedULL << 32);
    for (std::size_t t = 0; t < rounds; ++t) {
      Matrix row(1, low.size());
      for (Eigen::Index j = 0; j < low.size(); ++j) row(0, j) = low[j] + (high[j] - low[j]) * rng.uniform();
      losses.push_back(builtin::portfolio_log_loss(row));
    }
  } else {
    bad("losses", "expected an array of potentials, {\"portfolio\": rows} or {\"random_portfolio\": ...}");
  }
  if (losses.empty()) bad("losses", "must not be empty");
  return losses;
}

ExperimentOutput run_exp_weights_experiment(const Json& config, std::uint64_t seed, bool plot) {
  ExperimentOutput out;
  ExpWeightsConfig cfg;
  cfg.rounds = count_or(config, "rounds", "", cfg.rounds);
  cfg.n_samples = count_or(config, "n_samples", "", cfg.n_samples);
  cfg.learning_rate = number_or(config, "learning_rate", "", cfg.learning_rate);
  cfg.burn_in = count_or(config, "burn_in", "", cfg.burn_in);
  cfg.thinning = count_or(config, "thinning", "", cfg.thinning);
  cfg.reference_samples = count_or(config, "reference_samples", "", cfg.reference_samples);
  const auto losses = parse_losses(config, cfg.rounds, seed);
  ExpWeightsRun run;
  try {
    run = run_exp_weights(losses, cfg, seed);
  } catch (const ConfigError& e) {
    bad("losses", e.what());
  }

  double regret = 0.0;
  bool consistent = true;
  Json rounds = Json::array();
  for (const auto& r : run.rounds) {
    regret += r.loss - r.comparator_loss;
    consistent = consistent && regret == r.regret;
    rounds.push_back(to_json(r));
  }
  out.payload["rounds"] = cfg.rounds;
  out.payload["n_samples"] = cfg.n_samples;
  out.payload["learning_rate"] = number(cfg.learning_rate);
  out.payload["comparator"] = vector_json(run.comparator);
  out.payload["history"] = std::move(rounds);
  add_verdict(out, "regret re-sums exactly from per-round losses", consistent, "bit-exact left-to-right sums");
  if (cfg.rounds >= 2) {
    const std::size_t half = cfg.rounds / 2;
    const double late = run.rounds.back().regret / static_cast<double>(cfg.rounds);
    const double early = run.rounds[half - 1].regret / static_cast<double>(half);
    add_verdict(out, "average regret falls over the second half", late < early,
                "regret/t is " + fmt(early) + " at t=" + std::to_string(half) + " and " + fmt(late) +
                    " at t=" + std::to_string(cfg.rounds));
  }
  out.files.emplace_back("exp_weights.csv", exp_weights_csv(run.rounds));
  if (plot && !run.rounds.empty()) {
    plot::Figure f{"Sampled exponential weights", "round", "cumulative regret", false, {}};
    plot::Series s{"regret", {}, {}, false};
    for (const auto& r : run.rounds) {
      s.x.push_back(static_cast<double>(r.t));
      s.y.push_back(r.regret);
    }
    f.series.push_back(std::move(s));
    out.files.emplace_back("regret.svg", plot::render_svg(f));
  }
  return out;
}

ExperimentOutput run_iid(const Json& config, std::uint64_t seed, bool) {
  ExperimentOutput out;
  Potential p = parse_potential(require(config, "potential", ""));
  if (auto e = declared_eta(config, p)) p = p.with_known_eta(*e);
  std::vector<std::size_t> ns;
  const Json& nj = require(config, "N", "");
  if (nj.is_array()) {
    for (const auto& v : nj) ns.push_back(as_count(v, "N"));
  } else {
    ns.push_back(as_count(nj, "N"));
  }
  if (ns.empty()) bad("N", "must not be empty");
  for (auto n : ns)
    if (n == 0) bad("N", "entries must be positive");
  const auto grid = increasing_grid(config, "t_grid");
  const auto reps = count_or(config, "reps", "", 100000);
  if (reps == 0) bad("reps", "must be positive");
  const auto pre_pass = count_or(config, "pre_pass", "", 10'000'000);

  std::string csv = io::csv_row(std::vector<std::string>{"N", "t", "frequency", "bound", "exceedances", "reps"});
  Json rows = Json::array();
  std::uint64_t index = 0;
  for (auto n : ns) {
    for (double t : grid) {
      DeviationFrequency r;
      try {
        r = deviation_frequency(p, n, t, reps, seed + index++, pre_pass);
      } catch (const ConfigError& e) {
        bad("potential", e.what());
      }
      Json row = to_json(r);
      row["N"] = n;
      row["t"] = number(t);
      rows.push_back(std::move(row));
      csv += io::csv_row(std::vector<std::string>{std::to_string(n), fmt(t), fmt(r.frequency), fmt(r.bound),
                                                  std::to_string(r.exceedances), std::to_string(r.reps)});
      if (r.bound < 1.0)
        add_verdict(out, "frequency below i.i.d. bound at N=" + std::to_string(n) + ", t=" + fmt(t),
                    r.frequency <= r.bound, "frequency " + fmt(r.frequency) + " against " + fmt(r.bound));
    }
  }
  out.payload["potential"] = p.name();
  out.payload["eta"] = number(*p.known_eta());
  out.payload["results"] = std::move(rows);
  out.files.emplace_back("iid.csv", csv);
  return out;
}

ExperimentOutput run_hpd(const Json& config, std::uint64_t seed, bool) {
  ExperimentOutput out;
  const Potential p = parse_potential(require(config, "potential", ""));
  const double n = number_or(config, "n", "", 1.0);
  if (!(n > 0.0)) bad("n", "must be positive");
  const double alpha = number_or(config, "alpha", "", 0.05);
  if (!(alpha > 0.0 && alpha < 1.0)) bad("alpha", "must lie in (0, 1)");
  const double c1 = number_or(config, "c1", "", 1.0);
  const double c2 = number_or(config, "c2", "", 1.0);
  if (!(c1 > 0.0)) bad("c1", "must be positive");
  if (!(c2 > 0.0)) bad("c2", "must be positive");
  if (!config.contains("c1") || !config.contains("c2"))
    out.annotations.push_back("HPD constants c1, c2 default to 1; the thresholds hold up to unspecified constants");
  std::optional<double> eta = optional_number(config, "eta", "");
  if (!eta && !p.known_eta()) bad("eta", "potential declares none; give eta");
  const auto trials = count_or(config, "trials", "", 1);
  if (trials == 0) bad("trials", "must be positive");
  const auto sampler = parse_sampler(config, 10000);

  std::string csv = io::csv_row(std::vector<std::string>{"trial", "gamma", "threshold_plain", "threshold_exp_concave",
                                                         "contained_plain", "contained_exp_concave"});
  Json rows = Json::array();
  std::size_t plain = 0, exp_concave = 0;
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    const auto batch = draw(p, sampler, seed + trial);
    const auto r = hpd_experiment(p, n, alpha, batch, c1, c2, eta);
    plain += r.contained_plain;
    exp_concave += r.contained_exp_concave;
    rows.push_back(to_json(r));
    csv += io::csv_row(std::vector<std::string>{std::to_string(trial), fmt(r.gamma), fmt(r.thresholds.plain),
                                                fmt(r.thresholds.exp_concave), bool_text(r.contained_plain),
                                                bool_text(r.contained_exp_concave)});
  }
  out.payload["potential"] = p.name();
  out.payload["trials"] = std::move(rows);
  add_verdict(out, "contained in the plain HPD surrogate", plain == trials,
              std::to_string(plain) + "/" + std::to_string(trials) + " trials");
  add_verdict(out, "contained in the exp-concave HPD surrogate", exp_concave == trials,
              std::to_string(exp_concave) + "/" + std::to_string(trials) + " trials");

  if (auto it = config.find("regime"); it != config.end()) {
    const std::string where = "regime";
    if (!it->is_object()) bad(where, "expected an object");
    check_keys(*it, {"d", "n", "eta"}, where);
    const auto d = as_count(require(*it, "d", where), "regime.d");
    const double rn = as_number(require(*it, "n", where), "regime.n");
    const double reta = as_number(require(*it, "eta", where), "regime.eta");
    const auto th = hpd_thresholds(0.0, static_cast<int>(d), rn, reta, alpha, c1, c2);
    out.payload["regime"] = {{"d", d}, {"n", number(rn)}, {"eta", number(reta)},
                             {"threshold_plain", number(th.plain)}, {"threshold_exp_concave", number(th.exp_concave)}};
    add_verdict(out, "exp-concave threshold below plain threshold in the stated regime", th.exp_concave < th.plain,
                fmt(th.exp_concave) + " against " + fmt(th.plain) + " above V(x*)");
  }
  out.files.emplace_back("hpd.csv", csv);
  return out;
}

ExperimentOutput run_info_density(const Json& config, std::uint64_t seed, bool plot) {
  ExperimentOutput out;
  const double rho = as_number(require(config, "rho", ""), "rho");
  if (!(std::abs(rho) < 1.0)) bad("rho", "must lie in (-1, 1)");
  const auto d = count_or(config, "d", "", 1);
  if (d == 0 || d > 100000) bad("d", "must be a positive dimension");
  const auto n = count_or(config, "n", "", 100000);
  if (n == 0) bad("n", "must be positive");
  const auto grid = increasing_grid(config, "t_grid");
  const double c1 = number_or(config, "c1", "", 1.0);
  const double c2 = number_or(config, "c2", "", 1.0);
  if (!(c1 > 0.0)) bad("c1", "must be positive");
  if (!(c2 > 0.0)) bad("c2", "must be positive");
  const double confidence = number_or(config, "confidence", "", 0.99);
  if (!(confidence > 0.0 && confidence < 1.0)) bad("confidence", "must lie in (0, 1)");

  const auto r = information_density_experiment(rho, static_cast<int>(d), n, seed, grid, c1, c2, confidence);
  out.payload["information_density"] = to_json(r);
  add_verdict(out, "per-sample decomposition identities", r.identities_hold(),
              "worst relative residuals " + fmt(r.conditional_identity_error) + " and " + fmt(r.mutual_identity_error));
  add_verdict(out, "mutual information density mean matches I(X;Y)",
              std::abs(r.mutual_mean.value - r.mutual_information) <= 4.0 * r.mutual_mean.standard_error,
              fmt(r.mutual_mean.value) + " against " + fmt(r.mutual_information));
  add_verdict(out, "conditional density mean matches h(Y|X)",
              std::abs(r.conditional_mean.value - r.conditional_entropy) <= 4.0 * r.conditional_mean.standard_error,
              fmt(r.conditional_mean.value) + " against " + fmt(r.conditional_entropy));
  note_illustrative(out, r.conditional_tails.bounds);
  out.files.emplace_back("info_conditional_tails.csv", r.conditional_tails.csv());
  out.files.emplace_back("info_mutual_tails.csv", r.mutual_tails.csv());
  if (plot) {
    out.files.emplace_back("info_conditional_tails.svg",
                           plot::render_svg(tail_figure(r.conditional_tails, "Conditional information density")));
    out.files.emplace_back("info_mutual_tails.svg",
                           plot::render_svg(tail_figure(r.mutual_tails, "Mutual information density")));
  }
  return out;
}

ExperimentOutput run_regime_table(const Json& config, std::uint64_t, bool) {
  ExperimentOutput out;
  const auto etas = number_list(require(config, "etas", ""), "etas");
  if (etas.empty()) bad("etas", "must not be empty");
  for (double e : etas)
    if (!(e > 0.0) || !std::isfinite(e)) bad("etas", "entries must be positive");
  const auto d = as_count(require(config, "d", ""), "d");
  if (d == 0) bad("d", "must be positive");
  const auto grid = increasing_grid(config, "t_grid");
  const auto table = regime_table(etas, static_cast<int>(d), grid);
  out.payload["regime_table"] = to_json(table);
  out.payload["text"] = table.text();
  out.files.emplace_back("regime_table.csv", table.csv());
  return out;
}

using Runner = ExperimentOutput (*)(const Json&, std::uint64_t, bool);

const std::vector<std::pair<std::string, Runner>>& runners() {
  static const std::vector<std::pair<std::string, Runner>> table = {
      {"tails", run_tails},
      {"variance", run_variance},
      {"mgf", run_mgf},
      {"bl_check", run_bl_check},
      {"counterexample", run_counterexample},
      {"exp_weights", run_exp_weights_experiment},
      {"iid", run_iid},
      {"hpd", run_hpd},
      {"info_density", run_info_density},
      {"regime_table", run_regime_table},
  };
  return table;
}

const std::set<std::string> kTopLevelKeys = {
    "schema_version", "experiment", "seed", "output_dir", "potential", "sampler", "certify", "t_grid",
    "bounds", "confidence", "eta", "lambdas", "terms", "functions", "method", "lambda", "truncations",
    "losses", "rounds", "n_samples", "learning_rate", "burn_in", "thinning", "reference_samples", "N",
    "reps", "pre_pass", "n", "alpha", "c1", "c2", "trials", "regime", "rho", "d", "etas", "description"};

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

}  // namespace

bool ExperimentOutput::passed() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.passed; });
}

Potential parse_potential(const Json& spec, const std::string& where) {
  if (!spec.is_object()) bad(where, "expected an object");
  Potential p = [&]() -> Potential {
    if (spec.contains("builtin")) {
      check_keys(spec, {"builtin", "dimension", "scale", "data", "eta_radius", "q", "b", "lo", "hi", "multiply", "eta"},
                 where);
      const std::string name = string_or(spec, "builtin", where, "");
      if (!parse_builtin(name)) bad(join(where, "builtin"), "unknown builtin '" + name + "'");
      BuiltinParams params;
      if (spec.contains("dimension")) {
        const auto d = as_count(spec["dimension"], join(where, "dimension"));
        if (d == 0 || d > 1000000) bad(join(where, "dimension"), "must be a positive dimension");
        params.dimension = static_cast<int>(d);
      }
      params.scale = number_or(spec, "scale", where, 1.0);
      if (spec.contains("data")) params.data = matrix_from(spec["data"], join(where, "data"));
      params.eta_radius = optional_number(spec, "eta_radius", where);
      if (spec.contains("q")) params.q = matrix_from(spec["q"], join(where, "q"));
      if (spec.contains("b")) params.b = vector_from(spec["b"], join(where, "b"));
      params.lo = number_or(spec, "lo", where, params.lo);
      params.hi = number_or(spec, "hi", where, params.hi);
      try {
        return make_builtin(name, params);
      } catch (const ConfigError& e) {
        bad(where, e.what());
      }
    }
    if (spec.contains("sum")) {
      check_keys(spec, {"sum", "multiply", "eta"}, where);
      const Json& parts = spec["sum"];
      if (!parts.is_array() || parts.empty()) bad(join(where, "sum"), "expected a nonempty array");
      std::vector<std::pair<Potential, double>> members;
      for (std::size_t i = 0; i < parts.size(); ++i) {
        const std::string pw = join(where, "sum[" + std::to_string(i) + "]");
        if (!parts[i].is_object()) bad(pw, "expected an object");
        check_keys(parts[i], {"potential", "eta"}, pw);
        Potential part = parse_potential(require(parts[i], "potential", pw), join(pw, "potential"));
        std::optional<double> eta = optional_number(parts[i], "eta", pw);
        if (!eta) eta = part.known_eta();
        if (!eta || !(*eta > 0.0)) bad(join(pw, "eta"), "each part needs a positive eta");
        members.emplace_back(std::move(part), *eta);
      }
      try {
        return compose_sum(members);
      } catch (const ConfigError& e) {
        bad(join(where, "sum"), e.what());
      }
    }
    if (spec.contains("smooth")) {
      check_keys(spec, {"smooth", "nonsmooth", "multiply", "eta"}, where);
      const Potential smooth = parse_potential(spec["smooth"], join(where, "smooth"));
      const Potential nonsmooth = parse_potential(require(spec, "nonsmooth", where), join(where, "nonsmooth"));
      try {
        return add_nonsmooth(smooth, nonsmooth);
      } catch (const ConfigError& e) {
        bad(where, e.what());
      }
    }
    if (spec.contains("lift")) {
      check_keys(spec, {"lift", "dimension", "coordinate", "multiply", "eta"}, where);
      const Potential inner = parse_potential(spec["lift"], join(where, "lift"));
      const auto d = as_count(require(spec, "dimension", where), join(where, "dimension"));
      const auto j = as_count(require(spec, "coordinate", where), join(where, "coordinate"));
      if (d == 0 || d > 1000000) bad(join(where, "dimension"), "must be a positive dimension");
      try {
        return lift_coordinate(inner, static_cast<int>(d), static_cast<int>(j));
      } catch (const ConfigError& e) {
        bad(where, e.what());
      }
    }
    bad(where, "expected one of builtin, sum, smooth or lift");
  }();
  if (auto c = optional_number(spec, "multiply", where)) {
    if (!(*c > 0.0)) bad(join(where, "multiply"), "must be positive");
    p = scaled(p, *c);
  }
  if (auto eta = optional_number(spec, "eta", where)) {
    if (!(*eta >= 0.0)) bad(join(where, "eta"), "must be nonnegative");
    p = p.with_known_eta(*eta);
  }
  return p;
}

BoundSpec parse_bound(const Json& spec, const std::string& where) {
  if (!spec.is_object()) bad(where, "expected an object");
  check_keys(spec, {"kind", "d", "c1", "c2", "eta", "n", "terms"}, where);
  const std::string kind = string_or(spec, "kind", where, "");
  try {
    if (kind == "log_concave")
      return bound_log_concave(static_cast<int>(as_count(require(spec, "d", where), join(where, "d"))),
                               number_or(spec, "c1", where, 1.0), number_or(spec, "c2", where, 1.0));
    if (kind == "exp_concave") return bound_exp_concave(as_number(require(spec, "eta", where), join(where, "eta")));
    if (kind == "iid_chernoff")
      return bound_iid(as_number(require(spec, "eta", where), join(where, "eta")),
                       as_count(require(spec, "n", where), join(where, "n")));
    if (kind == "mgf_product")
      return bound_mgf_product(as_number(require(spec, "eta", where), join(where, "eta")),
                               count_or(spec, "terms", where, 60));
  } catch (const ConfigError& e) {
    const std::string message = e.what();
    if (message.find(where) == 0) throw;
    bad(where, message);
  }
  bad(join(where, "kind"), "unknown bound kind '" + kind + "'");
}

ExperimentOutput execute(const Json& config, std::uint64_t seed, bool plot) {
  if (!config.is_object()) bad("config", "expected a JSON object");
  check_keys(config, kTopLevelKeys, "");
  if (auto it = config.find("schema_version"); it != config.end() && as_count(*it, "schema_version") != kSchemaVersion)
    bad("schema_version", "unsupported version");
  const std::string kind = string_or(config, "experiment", "", "");
  if (kind.empty()) bad("experiment", "missing");
  for (const auto& [name, runner] : runners())
    if (name == kind) return runner(config, seed, plot);
  bad("experiment", "unknown experiment kind '" + kind + "'");
}

int run(const RunOptions& options, std::ostream& out, std::ostream& err) {
  Json config;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;
  try {
    std::ifstream in(options.config_path);
    if (!in) bad("config", "cannot read " + options.config_path.string());
    try {
      config = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      bad("config", std::string("invalid JSON: ") + e.what());
    }
    if (!config.is_object()) bad("config", "expected a JSON object");
    if (options.seed) {
      seed = *options.seed;
    } else {
      seed = as_count(require(config, "seed", ""), "seed");
    }
    if (options.out_dir) {
      out_dir = *options.out_dir;
    } else {
      const std::string dir = string_or(config, "output_dir", "", "");
      out_dir = dir.empty() ? std::filesystem::path("out") : std::filesystem::path(dir);
      if (out_dir.is_relative() && !dir.empty()) out_dir = options.config_path.parent_path() / out_dir;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return exit_config_error;
  }

  const auto started = std::chrono::steady_clock::now();
  const std::string started_at = utc_timestamp();
  ExperimentOutput result;
  try {
    result = execute(config, seed, options.plot);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return exit_config_error;
  } catch (const nlohmann::json::exception& e) {
    err << "config error: " << e.what() << "\n";
    return exit_config_error;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << "\n";
    return exit_runtime_error;
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  Json report;
  report["schema_version"] = kSchemaVersion;
  report["toolkit"] = "expconc";
  report["version"] = kToolkitVersion;
  report["experiment"] = config["experiment"];
  report["seed"] = seed;
  report["config"] = config;
  report["started_at"] = started_at;
  report["wall_clock_seconds"] = seconds;
  report["payload"] = result.payload;
  Json verdicts = Json::array();
  for (const auto& v : result.verdicts) verdicts.push_back({{"name", v.name}, {"passed", v.passed}, {"detail", v.detail}});
  report["verdicts"] = std::move(verdicts);
  report["annotations"] = result.annotations;
  Json artifacts = Json::array();
  for (const auto& f : result.files) artifacts.push_back(f.first);
  report["artifacts"] = std::move(artifacts);
  report["passed"] = result.passed();

  try {
    std::filesystem::create_directories(out_dir);
    for (const auto& [name, content] : result.files) io::write_file_atomic(out_dir / name, content);
    io::write_file_atomic(out_dir / "report.json", report.dump(2) + "\n");
  } catch (const std::exception& e) {
    err << "runtime error: cannot write outputs: " << e.what() << "\n";
    return exit_runtime_error;
  }

  for (const auto& v : result.verdicts) out << (v.passed ? "PASS " : "FAIL ") << v.name << " (" << v.detail << ")\n";
  out << "wrote " << (out_dir / "report.json").string() << "\n";
  return result.passed() ? exit_ok : exit_verdict_failed;
}

std::string list_builtins() {
  std::ostringstream s;
  s << "gaussian            dimension                  |x|^2/2 on R^d; η unset on unbounded support\n"
    << "exponential         dimension                  sum x_i on [0,inf)^d; not exp-concave (zero Hessian)\n"
    << "neg_log             dimension, scale           -scale*sum log x_i on (0,1)^d; η=1/(scale*d), η=1 at d=1, scale=1\n"
    << "logistic            data, eta_radius           sum log(1+exp(-<a_i,x>)); η set on [-R,R]^d when eta_radius=R is given\n"
    << "portfolio_log_loss  data                       -sum log <a_i, w(x)> on the simplex; η=1/rows\n"
    << "quadratic           q, b                       x'Qx/2 + b'x; η unset on unbounded support\n"
    << "l1_norm             dimension                  sum |x_i|; nonsmooth, not exp-concave\n"
    << "box_indicator       dimension, lo, hi          0 on [lo,hi]^d; indicator term, no η\n"
    << "zero                dimension                  0 on R^d; not exp-concave\n";
  return s.str();
}

}  // namespace expconc
