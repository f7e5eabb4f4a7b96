#include "expconc/samplers.hpp"

#include "expconc/io.hpp"
#include "expconc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <sstream>

namespace expconc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 8-point Gauss-Legendre nodes/weights on [-1, 1]
constexpr double kGlNodes[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                0.7966664774136267,  0.9602898564975363};
constexpr double kGlWeights[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                  0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                  0.2223810344533745, 0.1012285362903763};

double sample_factor(const CoordinateFactor& f, CounterRng& rng, const Interval& bounds) {
  double x = 0.0;
  switch (f.law) {
    case CoordinateFactor::Law::normal:
      x = rng.normal() / std::sqrt(f.rate);
      break;
    case CoordinateFactor::Law::exponential:
      x = rng.exponential() / f.rate;
      break;
    case CoordinateFactor::Law::power:
      x = std::pow(rng.uniform(), 1.0 / (f.rate + 1.0));
      break;
  }
  // rounding can land exactly on an open end; the margin is far below sampling resolution
  return std::clamp(x, bounds.effective_lo(), bounds.effective_hi());
}

double log_sum_exp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

/// Fold z into [lo, hi] by reflection at finite ends.
double reflect(double z, double lo, double hi) {
  const bool has_lo = std::isfinite(lo);
  const bool has_hi = std::isfinite(hi);
  if (has_lo && has_hi) {
    const double period = 2.0 * (hi - lo);
    double r = std::fmod(z - lo, period);
    if (r < 0.0) r += period;
    return r <= hi - lo ? lo + r : lo + period - r;
  }
  if (has_lo && z < lo) return 2.0 * lo - z;
  if (has_hi && z > hi) return 2.0 * hi - z;
  return z;
}

/// log density of the reflected N(mean, h^2) proposal at y in [lo, hi].
double log_reflected_normal(double y, double mean, double h, double lo, double hi) {
  auto term = [&](double image) {
    const double z = (image - mean) / h;
    return -0.5 * z * z;
  };
  const bool has_lo = std::isfinite(lo);
  const bool has_hi = std::isfinite(hi);
  if (!has_lo && !has_hi) return term(y);
  if (has_lo != has_hi) {
    const double wall = has_lo ? lo : hi;
    return log_sum_exp(term(y), term(2.0 * wall - y));
  }
  const double period = 2.0 * (hi - lo);
  const double reach = 40.0 * h;
  if (reach > 50.0 * period) {
    // Poisson summation: sum_k exp(-(u + kP)^2 / 2h^2)
    //   = (h sqrt(2 pi) / P) (1 + 2 sum_j exp(-2 pi^2 j^2 h^2 / P^2) cos(2 pi j u / P))
    const double omega = 2.0 * std::numbers::pi / period;
    double series = 2.0;
    for (int j = 1;; ++j) {
      const double damping = std::exp(-0.5 * (omega * j * h) * (omega * j * h));
      if (damping < 1e-300) break;
      series += 2.0 * damping * (std::cos(omega * j * (y - mean)) + std::cos(omega * j * (2.0 * lo - y - mean)));
    }
    return std::log(h * std::sqrt(2.0 * std::numbers::pi) / period) + std::log(series);
  }
  double total = -kInf;
  // images y + kP and 2lo - y + kP within reach of the mean
  for (double base : {y, 2.0 * lo - y}) {
    const auto k_lo = static_cast<long long>(std::floor((mean - reach - base) / period));
    const auto k_hi = static_cast<long long>(std::ceil((mean + reach - base) / period));
    for (long long k = k_lo; k <= k_hi; ++k) total = log_sum_exp(total, term(base + k * period));
  }
  return total;
}

struct ChainResult {
  std::vector<Vector> points;
  std::vector<double> values;
  std::size_t accepted = 0;
  std::size_t proposals = 0;
  double step_size = 0.0;
};

class ChainRunner {
 public:
  ChainRunner(const Potential& p, SamplingMethod method, const ChainConfig& cfg)
      : p_(p), method_(method), cfg_(cfg), bounds_(p.support().box_bounds()) {}

  ChainResult run(std::size_t n, Vector x, CounterRng& rng) const {
    ChainResult out;
    out.points.reserve(n);
    out.values.reserve(n);
    double v = p_.value(x);
    Vector g = needs_gradient() ? p_.gradient(x) : Vector();
    double log_h = std::log(cfg_.step_size);

    for (std::size_t it = 0; it < cfg_.burn_in; ++it) {
      const double acceptance = step(x, v, g, std::exp(log_h), rng);
      if (method_ == SamplingMethod::mala) {
        // Robbins-Monro on log step size, burn-in only
        log_h += std::pow(static_cast<double>(it) + 1.0, -0.6) * (acceptance - cfg_.target_acceptance);
        log_h = std::clamp(log_h, -30.0, 10.0);
      }
    }
    out.step_size = std::exp(log_h);

    const std::size_t total = n * cfg_.thinning;
    for (std::size_t it = 0; it < total; ++it) {
      const std::size_t before = accepted_;
      step(x, v, g, out.step_size, rng);
      out.accepted += accepted_ - before;
      out.proposals += 1;
      if ((it + 1) % cfg_.thinning == 0) {
        out.points.push_back(x);
        out.values.push_back(v);
      }
    }
    return out;
  }

 private:
  bool needs_gradient() const { return method_ != SamplingMethod::hit_and_run; }

  [[noreturn]] void diverged(const Vector& last) const {
    std::ostringstream msg;
    msg << "non-finite potential encountered; last valid state (";
    for (Eigen::Index i = 0; i < last.size(); ++i) msg << (i ? "," : "") << io::format_double(last[i]);
    msg << ")";
    throw SamplerDivergence(msg.str());
  }

  /// One transition in place; returns the acceptance probability of the move.
  double step(Vector& x, double& v, Vector& g, double h, CounterRng& rng) const {
    switch (method_) {
      case SamplingMethod::mala:
        return langevin_step(x, v, g, h, rng, true);
      case SamplingMethod::ula:
        return langevin_step(x, v, g, h, rng, false);
      case SamplingMethod::hit_and_run:
        return hit_and_run_step(x, v, rng);
      default:
        throw ConfigError("not a Markov chain method");
    }
  }

  double langevin_step(Vector& x, double& v, Vector& g, double h, CounterRng& rng,
                       bool adjust) const {
    const int d = p_.dimension();
    const Vector mean_fwd = x - 0.5 * h * h * g;
    Vector y(d);
    for (int i = 0; i < d; ++i) {
      y[i] = reflect(mean_fwd[i] + h * rng.normal(), bounds_[i].effective_lo(),
                     bounds_[i].effective_hi());
    }
    const double u = adjust ? rng.uniform() : 0.0;
    if (!p_.support().contains(y)) {
      ++rejected_outside_;
      return 0.0;
    }
    const double vy = p_.value(y);
    if (!std::isfinite(vy)) diverged(x);
    const Vector gy = p_.gradient(y);
    if (!gy.allFinite()) diverged(x);
    if (!adjust) {
      x = y, v = vy, g = gy;
      ++accepted_;
      return 1.0;
    }
    const Vector mean_bwd = y - 0.5 * h * h * gy;
    double log_fwd = 0.0;
    double log_bwd = 0.0;
    for (int i = 0; i < d; ++i) {
      const double lo = bounds_[i].effective_lo();
      const double hi = bounds_[i].effective_hi();
      log_fwd += log_reflected_normal(y[i], mean_fwd[i], h, lo, hi);
      log_bwd += log_reflected_normal(x[i], mean_bwd[i], h, lo, hi);
    }
    const double log_ratio = v - vy + log_bwd - log_fwd;
    const double acceptance = log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
    if (u < acceptance) {
      x = y, v = vy, g = gy;
      ++accepted_;
    }
    return acceptance;
  }

  /// Random direction, then a slice-sampling move along the chord: draw a
  /// level V(x) + Exp(1) and sample uniformly from the chord's sublevel set by
  /// shrinking the bracket toward the current point. Always accepted.
  double hit_and_run_step(Vector& x, double& v, CounterRng& rng) const {
    const int d = p_.dimension();
    Vector dir(d);
    for (int i = 0; i < d; ++i) dir[i] = rng.normal();
    dir /= dir.norm();
    auto [lo, hi] = p_.support().chord(x, dir);
    if (!std::isfinite(lo) || !std::isfinite(hi))
      throw ConfigError("hit_and_run needs a bounded support");
    const double level = v + rng.exponential();
    for (int attempt = 0; attempt < 200; ++attempt) {
      const double t = lo + (hi - lo) * rng.uniform();
      Vector y = x + t * dir;
      if (p_.support().contains(y)) {
        const double vy = p_.value(y);
        if (!std::isfinite(vy)) diverged(x);
        if (vy <= level) {
          x = std::move(y);
          v = vy;
          ++accepted_;
          return 1.0;
        }
      }
      if (t < 0.0) {
        lo = t;
      } else {
        hi = t;
      }
    }
    return 1.0;  // bracket collapsed onto x: staying put is the slice move's limit
  }

  const Potential& p_;
  SamplingMethod method_;
  ChainConfig cfg_;
  std::vector<Interval> bounds_;
  mutable std::size_t accepted_ = 0;
  mutable std::size_t rejected_outside_ = 0;
};

}  // namespace

std::string_view method_name(SamplingMethod m) {
  switch (m) {
    case SamplingMethod::exact_inverse_cdf: return "exact_inverse_cdf";
    case SamplingMethod::exact_gaussian: return "exact_gaussian";
    case SamplingMethod::exact_exponential: return "exact_exponential";
    case SamplingMethod::mala: return "mala";
    case SamplingMethod::ula: return "ula";
    case SamplingMethod::hit_and_run: return "hit_and_run";
  }
  return "";
}

std::optional<SamplingMethod> parse_method(std::string_view name) {
  for (auto m : {SamplingMethod::exact_inverse_cdf, SamplingMethod::exact_gaussian,
                 SamplingMethod::exact_exponential, SamplingMethod::mala, SamplingMethod::ula,
                 SamplingMethod::hit_and_run}) {
    if (method_name(m) == name) return m;
  }
  return std::nullopt;
}

std::vector<double> SampleBatch::coordinate(int j) const {
  std::vector<double> out(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = points(static_cast<Eigen::Index>(i), j);
  return out;
}

void ChainConfig::validate() const {
  if (!(step_size > 0.0) || !std::isfinite(step_size)) throw ConfigError("step_size must be positive");
  if (thinning < 1) throw ConfigError("thinning must be positive");
  if (n_chains < 1) throw ConfigError("n_chains must be positive");
  if (!(target_acceptance > 0.0 && target_acceptance < 1.0))
    throw ConfigError("target_acceptance must lie in (0,1)");
}

// ---------------------------------------------------------------------------
// tabulated CDF

TabulatedCdf::TabulatedCdf(const Potential& p) : potential_(p) {
  if (p.dimension() != 1) throw ConfigError("tabulated CDF needs a one-dimensional potential");
  const Interval bounds = p.support().box_bounds()[0];
  const double x0 = p.support().interior_point()[0];
  const double v0 = p.value(Vector::Constant(1, x0));
  auto value_at = [&](double x) { return p.value(Vector::Constant(1, x)); };

  // walk outward until the density is negligible or the support ends
  constexpr double kCutoff = 60.0;
  auto find_end = [&](double sign) {
    const double wall = sign > 0 ? bounds.effective_hi() : bounds.effective_lo();
    double step = 1.0;
    double x = x0;
    double lowest = v0;
    for (int it = 0; it < 200; ++it) {
      double next = x + sign * step;
      if (std::isfinite(wall) && sign * (next - wall) >= 0.0) return wall;
      const double vn = value_at(next);
      lowest = std::min(lowest, vn);
      x = next;
      if (vn - lowest > kCutoff && vn > v0) return x;
      step *= 2.0;
    }
    throw ConfigError("density does not decay; potential is not integrable");
  };
  const double lo = find_end(-1.0);
  const double hi = find_end(1.0);

  constexpr int kCells = 4096;
  std::vector<double> edges;
  edges.reserve(kCells + 8);
  for (int i = 0; i <= kCells; ++i) edges.push_back(lo + (hi - lo) * i / kCells);
  edges.back() = hi;
  for (double b : p.breakpoints()) {
    if (b > lo && b < hi) edges.push_back(b);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges_ = std::move(edges);

  reference_ = v0;
  for (double e : edges_) reference_ = std::min(reference_, value_at(e));

  cumulative_.assign(edges_.size(), 0.0);
  for (std::size_t i = 1; i < edges_.size(); ++i) {
    cumulative_[i] = cumulative_[i - 1] + cell_mass(edges_[i - 1], edges_[i]);
  }
  const double total = cumulative_.back();
  if (!(total > 0.0) || !std::isfinite(total)) throw ConfigError("density has no finite mass");
  for (double& c : cumulative_) c /= total;
  reference_ -= std::log(total);  // density() is now normalised
}

double TabulatedCdf::density(double x) const {
  return std::exp(reference_ - potential_.value(Vector::Constant(1, x)));
}

double TabulatedCdf::cell_mass(double a, double b) const {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double sum = 0.0;
  for (int k = 0; k < 8; ++k) sum += kGlWeights[k] * density(mid + half * kGlNodes[k]);
  return sum * half;
}

double TabulatedCdf::cdf(double x) const {
  if (x <= edges_.front()) return 0.0;
  if (x >= edges_.back()) return 1.0;
  const auto it = std::upper_bound(edges_.begin(), edges_.end(), x);
  const std::size_t cell = static_cast<std::size_t>(it - edges_.begin()) - 1;
  return cumulative_[cell] + cell_mass(edges_[cell], x);
}

double TabulatedCdf::inverse(double u) const {
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  std::size_t cell = static_cast<std::size_t>(it - cumulative_.begin());
  cell = std::clamp<std::size_t>(cell, 1, edges_.size() - 1) - 1;
  double a = edges_[cell];
  double b = edges_[cell + 1];
  const double target = u - cumulative_[cell];
  double x = 0.5 * (a + b);
  // safeguarded Newton on F(x) - u within the cell
  for (int it_count = 0; it_count < 60; ++it_count) {
    const double f = cell_mass(edges_[cell], x) - target;
    if (f > 0.0) {
      b = x;
    } else {
      a = x;
    }
    const double dens = density(x);
    double next = dens > 0.0 ? x - f / dens : 0.5 * (a + b);
    if (!(next > a && next < b)) next = 0.5 * (a + b);
    if (std::abs(next - x) <= 1e-15 * (1.0 + std::abs(x))) {
      x = next;
      break;
    }
    x = next;
  }
  const Interval bounds = potential_.support().box_bounds()[0];
  return std::clamp(x, bounds.effective_lo(), bounds.effective_hi());
}

// ---------------------------------------------------------------------------

SampleBatch sample_exact(const Potential& p, std::size_t n, std::uint64_t seed) {
  const int d = p.dimension();
  SampleBatch batch;
  batch.seed = seed;
  batch.points.resize(static_cast<Eigen::Index>(n), d);
  batch.v_values.resize(n);
  CounterRng rng(seed, 0);
  const auto& bounds = p.support().box_bounds();

  if (p.fully_factorized()) {
    const Factorization& factors = *p.factorization();
    auto all_of_law = [&](CoordinateFactor::Law law) {
      return std::all_of(factors.begin(), factors.end(), [&](const auto& f) { return f->law == law; });
    };
    batch.method = all_of_law(CoordinateFactor::Law::normal)        ? SamplingMethod::exact_gaussian
                   : all_of_law(CoordinateFactor::Law::exponential) ? SamplingMethod::exact_exponential
                                                                   : SamplingMethod::exact_inverse_cdf;
    Vector x(d);
    for (std::size_t i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) x[j] = sample_factor(*factors[j], rng, bounds[j]);
      batch.points.row(static_cast<Eigen::Index>(i)) = x.transpose();
      batch.v_values[i] = p.value(x);
    }
  } else if (d == 1) {
    batch.method = SamplingMethod::exact_inverse_cdf;
    const TabulatedCdf table(p);
    for (std::size_t i = 0; i < n; ++i) {
      const Vector x = Vector::Constant(1, table.inverse(rng.uniform()));
      batch.points(static_cast<Eigen::Index>(i), 0) = x[0];
      batch.v_values[i] = p.value(x);
    }
  } else {
    throw ConfigError("no exact sampler for potential '" + p.name() + "'");
  }
  batch.diagnostics.acceptance_rate = 1.0;
  batch.diagnostics.effective_sample_size = static_cast<double>(n);
  return batch;
}

SampleBatch sample_mcmc(const Potential& p, std::size_t n, SamplingMethod method,
                        const ChainConfig& cfg, std::uint64_t seed, std::optional<Vector> start) {
  cfg.validate();
  if (method != SamplingMethod::mala && method != SamplingMethod::ula &&
      method != SamplingMethod::hit_and_run)
    throw ConfigError("sample_mcmc needs mala, ula or hit_and_run");
  if (method == SamplingMethod::hit_and_run && !p.support().bounded())
    throw ConfigError("hit_and_run needs a bounded support");
  const Vector x0 = start ? *start : p.support().interior_point();
  if (!p.support().contains(x0)) throw ConfigError("chain start lies outside the support");

  const std::size_t chains = cfg.n_chains;
  std::vector<std::future<ChainResult>> futures;
  for (std::size_t c = 0; c < chains; ++c) {
    const std::size_t count = n / chains + (c < n % chains ? 1 : 0);
    futures.push_back(std::async(std::launch::async, [&, c, count]() {
      CounterRng rng(seed, c);
      ChainRunner runner(p, method, cfg);
      return runner.run(count, x0, rng);
    }));
  }
  std::vector<ChainResult> results;
  for (auto& f : futures) results.push_back(f.get());

  SampleBatch batch;
  batch.seed = seed;
  batch.method = method;
  batch.points.resize(static_cast<Eigen::Index>(n), p.dimension());
  batch.v_values.reserve(n);
  std::size_t accepted = 0;
  std::size_t proposals = 0;
  double total_ess = 0.0;
  Eigen::Index row = 0;
  for (const auto& r : results) {
    for (std::size_t i = 0; i < r.points.size(); ++i) {
      batch.points.row(row++) = r.points[i].transpose();
      batch.v_values.push_back(r.values[i]);
    }
    accepted += r.accepted;
    proposals += r.proposals;
    total_ess += r.values.size() >= 10 ? ess(r.values) : static_cast<double>(r.values.size());
  }
  batch.diagnostics.acceptance_rate =
      proposals > 0 ? static_cast<double>(accepted) / static_cast<double>(proposals) : 1.0;
  batch.diagnostics.effective_sample_size = total_ess;
  batch.diagnostics.burn_in = cfg.burn_in;
  batch.diagnostics.thinning = cfg.thinning;
  batch.diagnostics.n_chains = chains;
  batch.diagnostics.step_size = results.empty() ? cfg.step_size : results.front().step_size;
  if (method == SamplingMethod::mala && proposals > 0 && batch.diagnostics.acceptance_rate < 0.05) {
    std::ostringstream msg;
    msg << "MALA acceptance " << batch.diagnostics.acceptance_rate << " below 0.05 after tuning";
    throw TuningFailure(msg.str());
  }
  return batch;
}

double ess(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 10) throw std::invalid_argument("ess needs at least 10 values");
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double c0 = 0.0;
  for (double v : x) c0 += (v - mean) * (v - mean);
  c0 /= static_cast<double>(n);
  if (c0 <= 0.0) return static_cast<double>(n);
  auto rho = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += (x[i] - mean) * (x[i + lag] - mean);
    return s / static_cast<double>(n) / c0;
  };
  double sum = 0.0;
  for (std::size_t m = 0; 2 * m + 1 < n; ++m) {
    const double pair = (m == 0 ? 1.0 : rho(2 * m)) + rho(2 * m + 1);
    if (pair <= 0.0) break;
    sum += pair;
  }
  const double tau = -1.0 + 2.0 * sum;
  const double value = tau > 0.0 ? static_cast<double>(n) / tau : static_cast<double>(n);
  return std::clamp(value, 1.0, static_cast<double>(n));
}

void write_csv(const SampleBatch& batch, std::ostream& out) {
  std::vector<std::string> header;
  for (int j = 0; j < batch.dimension(); ++j) header.push_back("x" + std::to_string(j));
  header.push_back("v");
  out << io::csv_row(header);
  std::vector<double> row(static_cast<std::size_t>(batch.dimension()) + 1);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    for (int j = 0; j < batch.dimension(); ++j) row[j] = batch.points(static_cast<Eigen::Index>(i), j);
    row.back() = batch.v_values[i];
    out << io::csv_row(row);
  }
}

}  // namespace expconc
