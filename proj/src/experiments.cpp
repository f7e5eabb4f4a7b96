#include "expconc/experiments.hpp"

#include "expconc/io.hpp"
#include "expconc/optimize.hpp"
#include "expconc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace expconc {
namespace {

/// Independent seed for sub-run `index` of a run keyed by `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  CounterRng rng(seed, index ^ (0x5eedULL << 40));
  return rng();
}

}  // namespace

Potential cumulative_loss(const std::vector<Potential>& losses, std::size_t count, double weight) {
  if (losses.empty()) throw ConfigError("loss stream is empty");
  std::vector<Potential> used;
  used.reserve(count);
  for (std::size_t i = 0; i < count; ++i) used.push_back(losses[i % losses.size()]);
  const int d = losses.front().dimension();
  Potential::Functions f;
  f.value = [used, weight](const Vector& x) {
    double v = 0.0;
    for (const auto& p : used) v += p.value(x);
    return weight * v;
  };
  f.gradient = [used, weight, d](const Vector& x) {
    Vector g = Vector::Zero(d);
    for (const auto& p : used) g += p.gradient(x);
    return Vector(weight * g);
  };
  f.hessian = [used, weight, d](const Vector& x) {
    Matrix h = Matrix::Zero(d, d);
    for (const auto& p : used) h += p.hessian(x);
    return Matrix(weight * h);
  };
  return Potential("cumulative_loss(" + std::to_string(count) + ")", losses.front().support(), std::move(f));
}

ExpWeightsRun run_exp_weights(const std::vector<Potential>& losses, const ExpWeightsConfig& cfg,
                              std::uint64_t seed) {
  ExpWeightsRun run;
  if (cfg.rounds == 0) return run;
  if (losses.empty()) throw ConfigError("losses: stream is empty");
  const int d = losses.front().dimension();
  for (const auto& loss : losses) {
    if (loss.dimension() != d) throw ConfigError("losses: dimension mismatch");
    if (!loss.support().bounded())
      throw ConfigError("losses: posterior needs a bounded support (add a box or simplex indicator)");
  }
  if (cfg.n_samples == 0) throw ConfigError("n_samples must be positive");
  if (!(cfg.learning_rate > 0.0) || !std::isfinite(cfg.learning_rate))
    throw ConfigError("learning_rate must be positive");
  if (cfg.thinning == 0) throw ConfigError("thinning must be positive");

  ChainConfig chain;
  chain.burn_in = cfg.burn_in;
  chain.thinning = cfg.thinning;
  chain.n_chains = 1;

  Vector start = losses.front().support().interior_point();
  std::vector<Vector> predictions;
  std::vector<double> deviations;
  predictions.reserve(cfg.rounds);
  for (std::size_t t = 1; t <= cfg.rounds; ++t) {
    const Potential posterior = cumulative_loss(losses, t - 1, cfg.learning_rate);
    const auto batch = sample_mcmc(posterior, cfg.n_samples, SamplingMethod::hit_and_run, chain,
                                   derive_seed(seed, 2 * t), start);
    Vector mean = batch.points.colwise().mean().transpose();
    if (!posterior.support().contains(mean)) mean = start;
    predictions.push_back(mean);
    start = mean;

    double deviation = 0.0;
    if (t > 1 && cfg.reference_samples > 0) {
      const auto reference = sample_mcmc(posterior, cfg.reference_samples, SamplingMethod::hit_and_run, chain,
                                         derive_seed(seed, 2 * t + 1), mean);
      deviation = std::abs(compensated_mean(batch.v_values) - compensated_mean(reference.v_values));
    }
    deviations.push_back(deviation);
  }

  MinimizeOptions opts;
  const auto best = minimize(cumulative_loss(losses, cfg.rounds), predictions.back(), opts);
  if (!best.converged) throw std::runtime_error("comparator minimisation did not converge");
  run.comparator = best.x;

  double regret = 0.0;
  for (std::size_t t = 1; t <= cfg.rounds; ++t) {
    OnlineRound r;
    r.t = t;
    r.loss_index = (t - 1) % losses.size();
    r.prediction = predictions[t - 1];
    r.loss = losses[r.loss_index].value(r.prediction);
    r.comparator_loss = losses[r.loss_index].value(run.comparator);
    regret += r.loss - r.comparator_loss;
    r.regret = regret;
    r.deviation = deviations[t - 1];
    run.rounds.push_back(std::move(r));
  }
  return run;
}

std::string exp_weights_csv(const std::vector<OnlineRound>& rounds) {
  std::string out = io::csv_row(std::vector<std::string>{"t", "loss", "regret", "deviation"});
  for (const auto& r : rounds)
    out += io::csv_row(std::vector<std::string>{std::to_string(r.t), io::format_double(r.loss),
                                                io::format_double(r.regret), io::format_double(r.deviation)});
  return out;
}

DeviationFrequency deviation_frequency(const Potential& p, std::size_t n, double t, std::size_t reps,
                                       std::uint64_t seed, std::size_t pre_pass) {
  if (!p.known_eta() || !(*p.known_eta() > 0.0)) throw ConfigError("potential: deviation_frequency needs a declared eta");
  if (!p.fully_factorized() && p.dimension() != 1) throw ConfigError("potential: no exact sampler");
  if (n == 0) throw ConfigError("N must be positive");
  if (reps == 0) throw ConfigError("reps must be positive");
  if (!(t >= 0.0) || !std::isfinite(t)) throw ConfigError("t must be nonnegative");

  DeviationFrequency out;
  out.reps = reps;
  out.bound = bound_iid(*p.known_eta(), n).evaluate(t);

  if (p.fully_factorized()) {
    double ev = 0.0;
    for (const auto& f : *p.factorization())
      if (f) ev += f->mean_potential();
    out.expected_v = {ev, 0.0};
    out.closed_form_mean = true;
  } else {
    const auto batch = sample_exact(p, pre_pass, derive_seed(seed, 0));
    out.expected_v = mean_estimate(batch.v_values);
    if (t > 0.0 && !(out.expected_v.standard_error < t / 100.0))
      throw std::runtime_error("EV pre-pass standard error is not below t/100");
  }

  const std::size_t chunk_reps = std::max<std::size_t>(1, 200000 / n);
  std::size_t done = 0;
  for (std::uint64_t chunk = 1; done < reps; ++chunk) {
    const std::size_t m = std::min(chunk_reps, reps - done);
    const auto batch = sample_exact(p, m * n, derive_seed(seed, chunk));
    for (std::size_t r = 0; r < m; ++r) {
      CompensatedSum s;
      for (std::size_t i = 0; i < n; ++i) s.add(batch.v_values[r * n + i]);
      if (std::abs(s.value() / static_cast<double>(n) - out.expected_v.value) > t) ++out.exceedances;
    }
    done += m;
  }
  out.frequency = static_cast<double>(out.exceedances) / static_cast<double>(reps);
  return out;
}

HpdThresholds hpd_thresholds(double map_value, int d, double n, double eta, double alpha, double c1, double c2) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (d < 1) throw ConfigError("dimension must be positive");
  if (!(n > 0.0) || !(eta > 0.0)) throw ConfigError("n and eta must be positive");
  if (!(c1 > 0.0) || !(c2 > 0.0)) throw ConfigError("c1 and c2 must be positive");
  const double log_inv = -std::log(alpha);
  const double dd = static_cast<double>(d);
  return {map_value + dd * (c1 * std::sqrt(log_inv / dd)) + dd, map_value + c2 * log_inv * std::sqrt(n / eta) + dd};
}

std::string HpdResult::tighter() const {
  if (thresholds.exp_concave < thresholds.plain) return "exp_concave";
  if (thresholds.plain < thresholds.exp_concave) return "plain";
  return "equal";
}

HpdResult hpd_experiment(const Potential& p, double n, double alpha, const SampleBatch& batch, double c1, double c2,
                         std::optional<double> eta) {
  if (batch.size() == 0) throw ConfigError("batch is empty");
  if (batch.dimension() != p.dimension()) throw ConfigError("batch dimension does not match the potential");
  HpdResult out;
  out.alpha = alpha;
  out.n = n;
  out.c1 = c1;
  out.c2 = c2;
  if (eta) {
    out.eta = *eta;
  } else {
    if (!p.known_eta()) throw ConfigError("eta: potential declares none");
    out.eta = n * *p.known_eta();
  }
  const auto best = minimize(p);
  if (!best.converged) throw std::runtime_error("MAP minimisation did not converge");
  out.map_point = best.x;
  out.map_value = best.value;
  out.thresholds = hpd_thresholds(best.value, p.dimension(), n, out.eta, alpha, c1, c2);
  out.gamma = quantile(batch.v_values, 1.0 - alpha);
  out.contained_plain = out.gamma <= out.thresholds.plain;
  out.contained_exp_concave = out.gamma <= out.thresholds.exp_concave;
  return out;
}

InformationDensityReport information_density_experiment(double rho, int d, std::size_t n, std::uint64_t seed,
                                                        const std::vector<double>& t_grid, double c1, double c2,
                                                        double confidence) {
  if (!(std::abs(rho) < 1.0)) throw ConfigError("rho must lie in (-1, 1)");
  if (d < 1) throw ConfigError("dimension must be positive");
  if (n == 0) throw ConfigError("n must be positive");

  InformationDensityReport out;
  out.rho = rho;
  out.d = d;
  out.n = n;
  const double dd = static_cast<double>(d);
  const double s2 = 1.0 - rho * rho;
  const double log_s2 = std::log1p(-rho * rho);
  const double log_2pi = std::log(2.0 * std::numbers::pi);
  out.conditional_entropy = 0.5 * dd * (log_2pi + 1.0 + log_s2);
  out.mutual_information = -0.5 * dd * log_s2;

  CounterRng rng(seed, 0);
  const double sd = std::sqrt(s2);
  out.conditional.resize(n);
  out.mutual.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double xx = 0.0, yy = 0.0, xy = 0.0, rr = 0.0;
    for (int j = 0; j < d; ++j) {
      const double x = rng.normal();
      const double y = rho * x + sd * rng.normal();
      xx += x * x;
      yy += y * y;
      xy += x * y;
      const double r = y - rho * x;
      rr += r * r;
    }
    const double joint = dd * log_2pi + 0.5 * dd * log_s2 + (xx - 2.0 * rho * xy + yy) / (2.0 * s2);
    const double marginal_x = 0.5 * dd * log_2pi + 0.5 * xx;
    const double marginal_y = 0.5 * dd * log_2pi + 0.5 * yy;
    const double conditional = 0.5 * dd * (log_2pi + log_s2) + rr / (2.0 * s2);
    const double mutual = -0.5 * dd * log_s2 - (rho * rho * (xx + yy) - 2.0 * rho * xy) / (2.0 * s2);
    const double scale = std::max(1.0, std::abs(joint));
    out.conditional_identity_error =
        std::max(out.conditional_identity_error, std::abs(joint - marginal_x - conditional) / scale);
    out.mutual_identity_error =
        std::max(out.mutual_identity_error, std::abs(marginal_x + marginal_y - joint - mutual) / scale);
    out.conditional[i] = conditional;
    out.mutual[i] = mutual;
  }
  out.conditional_mean = mean_estimate(out.conditional);
  out.mutual_mean = mean_estimate(out.mutual);
  const std::vector<BoundSpec> bounds = {bound_log_concave(d, 2.0 * c1, c2 / 2.0),
                                         bound_log_concave(d, 3.0 * c1, c2 / 3.0)};
  out.conditional_tails = estimate_tails(out.conditional, t_grid, bounds, confidence);
  out.mutual_tails = estimate_tails(out.mutual, t_grid, bounds, confidence);
  return out;
}

}  // namespace expconc
