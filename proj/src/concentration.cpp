#include "expconc/concentration.hpp"

#include "expconc/io.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace expconc {
namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(what) + " must be positive");
}

void validate_grid(const std::vector<double>& t_grid) {
  if (t_grid.empty()) throw ConfigError("t_grid is empty");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] >= 0.0) || !std::isfinite(t_grid[i])) throw ConfigError("t_grid entries must be nonnegative");
    if (i > 0 && !(t_grid[i] > t_grid[i - 1])) throw ConfigError("t_grid must be strictly increasing");
  }
}

/// log of the k-th factor (1 - u)^{-2^k}, u = lambda^2 / (4^{k+1} eta)
double log_factor(double u, std::size_t k) { return -std::ldexp(std::log1p(-u), static_cast<int>(k)); }

}  // namespace

std::string_view kind_name(BoundSpec::Kind k) {
  switch (k) {
    case BoundSpec::Kind::log_concave: return "log_concave";
    case BoundSpec::Kind::exp_concave: return "exp_concave";
    case BoundSpec::Kind::iid_chernoff: return "iid_chernoff";
    case BoundSpec::Kind::mgf_product: return "mgf_product";
  }
  return "";
}

double BoundSpec::evaluate(double t) const {
  switch (kind) {
    case Kind::log_concave:
      return c1 * std::exp(-c2 * std::min(t, t * t / d));
    case Kind::exp_concave:
      return 6.0 * std::exp(-std::max(std::sqrt(eta), eta) * t);
    case Kind::iid_chernoff:
      return 2.0 * std::exp(-static_cast<double>(n) * (std::sqrt(eta) * t - std::log(3.0)));
    case Kind::mgf_product:
      return mgf_product_bound(t, eta, terms);
  }
  return 0.0;
}

std::string BoundSpec::label() const {
  std::ostringstream out;
  out << kind_name(kind) << "(";
  switch (kind) {
    case Kind::log_concave:
      out << "d=" << d << ";c1=" << io::format_double(c1) << ";c2=" << io::format_double(c2);
      break;
    case Kind::exp_concave:
      out << "eta=" << io::format_double(eta);
      break;
    case Kind::iid_chernoff:
      out << "eta=" << io::format_double(eta) << ";N=" << n;
      break;
    case Kind::mgf_product:
      out << "eta=" << io::format_double(eta) << ";K=" << terms;
      break;
  }
  out << ")";
  return out.str();
}

BoundSpec bound_log_concave(int d, double c1, double c2) {
  if (d < 1) throw ConfigError("dimension must be positive");
  require_positive(c1, "c1");
  require_positive(c2, "c2");
  BoundSpec b;
  b.kind = BoundSpec::Kind::log_concave;
  b.d = d;
  b.c1 = c1;
  b.c2 = c2;
  return b;
}

BoundSpec bound_exp_concave(double eta) {
  require_positive(eta, "eta");
  BoundSpec b;
  b.kind = BoundSpec::Kind::exp_concave;
  b.eta = eta;
  return b;
}

BoundSpec bound_iid(double eta, std::size_t n) {
  require_positive(eta, "eta");
  if (n < 1) throw ConfigError("N must be positive");
  BoundSpec b;
  b.kind = BoundSpec::Kind::iid_chernoff;
  b.eta = eta;
  b.n = n;
  return b;
}

BoundSpec bound_mgf_product(double eta, std::size_t terms) {
  require_positive(eta, "eta");
  if (terms < 1) throw ConfigError("K must be positive");
  BoundSpec b;
  b.kind = BoundSpec::Kind::mgf_product;
  b.eta = eta;
  b.terms = terms;
  return b;
}

double mgf_product_partial(double lambda, double eta, std::size_t terms) {
  require_positive(eta, "eta");
  if (terms < 1) throw std::invalid_argument("K must be positive");
  const double ratio = lambda * lambda / eta;
  if (!(ratio < 16.0)) throw std::domain_error("product bound diverges for lambda^2 >= 16 eta");
  CompensatedSum log_total;
  for (std::size_t k = 1; k <= terms; ++k) {
    const double u = ratio / std::ldexp(1.0, 2 * static_cast<int>(k) + 2);
    log_total.add(log_factor(u, k));
  }
  return std::exp(log_total.value());
}

double mgf_product_bound(double lambda, double eta, std::size_t terms) {
  const double partial = mgf_product_partial(lambda, eta, terms);
  // -log(1-u) <= u / (1 - u_max) for u <= u_max, with u_max the first omitted u;
  // sum_{k>K} 2^k ratio / 4^{k+1} = ratio 2^{-K} / 4
  const double ratio = lambda * lambda / eta;
  const double u_max = ratio / std::ldexp(1.0, 2 * static_cast<int>(terms) + 4);
  const double tail = ratio * std::ldexp(1.0, -static_cast<int>(terms)) / 4.0 / (1.0 - u_max);
  return partial * std::exp(tail);
}

bool TailReport::dominated_by(std::size_t j) const {
  const auto& values = bound_values.at(j);
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (values[i] < 1.0 && survival_ucb[i] > values[i]) return false;
  }
  return true;
}

std::string TailReport::csv() const {
  std::vector<std::string> header{"t", "empirical", "ucb"};
  for (const auto& b : bounds) header.push_back("bound_" + b.label());
  std::string out = io::csv_row(header);
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    std::vector<double> row{t_grid[i], empirical_survival[i], survival_ucb[i]};
    for (const auto& values : bound_values) row.push_back(values[i]);
    out += io::csv_row(row);
  }
  return out;
}

TailReport estimate_tails(std::span<const double> v, const std::vector<double>& t_grid,
                          const std::vector<BoundSpec>& bounds, double confidence) {
  if (v.empty()) throw std::invalid_argument("cannot estimate tails of an empty batch");
  validate_grid(t_grid);
  for (const auto& b : bounds) {
    if (!b.is_tail()) throw ConfigError("mgf_product is not a tail bound");
  }
  const std::size_t n = v.size();
  const double anchor = v[0];
  std::vector<double> shifted(n);
  for (std::size_t i = 0; i < n; ++i) shifted[i] = v[i] - anchor;
  const Estimate mean = mean_estimate(shifted);
  const Estimate var = variance_jackknife(shifted);

  std::vector<double> deviations(n);
  for (std::size_t i = 0; i < n; ++i) deviations[i] = std::abs(shifted[i] - mean.value);
  std::sort(deviations.begin(), deviations.end());

  TailReport r;
  r.t_grid = t_grid;
  r.sample_size = n;
  r.confidence = confidence;
  r.bounds = bounds;
  r.mean_v = anchor + mean.value;
  r.mean_standard_error = mean.standard_error;
  r.var_v = var.value;
  for (double t : t_grid) {
    const auto above = static_cast<std::size_t>(deviations.end() -
                                                std::upper_bound(deviations.begin(), deviations.end(), t));
    r.exceedances.push_back(above);
    r.empirical_survival.push_back(static_cast<double>(above) / static_cast<double>(n));
    r.survival_ucb.push_back(clopper_pearson_upper(above, n, confidence));
  }
  for (const auto& b : bounds) {
    std::vector<double> values;
    for (double t : t_grid) values.push_back(b.evaluate(t));
    r.bound_values.push_back(std::move(values));
  }
  return r;
}

TailReport estimate_tails(const SampleBatch& batch, const std::vector<double>& t_grid,
                          const std::vector<BoundSpec>& bounds, double confidence) {
  return estimate_tails(std::span<const double>(batch.v_values), t_grid, bounds, confidence);
}

Estimate estimate_mgf(std::span<const double> v, double lambda) {
  if (v.empty()) throw std::invalid_argument("cannot estimate the MGF of an empty batch");
  if (lambda == 0.0) return {1.0, 0.0};
  const std::size_t n = v.size();
  const double anchor = v[0];
  std::vector<double> shifted(n);
  for (std::size_t i = 0; i < n; ++i) shifted[i] = v[i] - anchor;
  const double mean = compensated_mean(shifted);
  std::vector<double> exponents(n);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    exponents[i] = lambda * (shifted[i] - mean);
    top = std::max(top, exponents[i]);
  }
  // E e^{a} = e^{top} E e^{a - top}; standard error scales the same way
  std::vector<double> scaled(n);
  for (std::size_t i = 0; i < n; ++i) scaled[i] = std::exp(exponents[i] - top);
  const Estimate m = mean_estimate(scaled);
  const double factor = std::exp(top);
  return {m.value * factor, m.standard_error * factor};
}

Estimate estimate_mgf(const SampleBatch& batch, double lambda) {
  return estimate_mgf(std::span<const double>(batch.v_values), lambda);
}

VarianceReport estimate_variance_bounds(std::span<const double> v, std::optional<double> eta, int d) {
  if (v.size() < 2) throw std::invalid_argument("variance needs at least two values");
  if (d < 1) throw ConfigError("dimension must be positive");
  if (eta) require_positive(*eta, "eta");
  const double anchor = v[0];
  std::vector<double> shifted(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) shifted[i] = v[i] - anchor;
  VarianceReport r;
  r.variance = variance_jackknife(shifted);
  r.dimension = d;
  r.eta = eta;
  const double slack = r.allowance_se * r.variance.standard_error;
  r.within_dimension = r.variance.value <= d + slack;
  if (eta) r.within_inverse_eta = r.variance.value <= 1.0 / *eta + slack;
  return r;
}

VarianceReport estimate_variance_bounds(const SampleBatch& batch, std::optional<double> eta, int d) {
  return estimate_variance_bounds(std::span<const double>(batch.v_values), eta, d);
}

RegimeTable regime_table(const std::vector<double>& etas, int d, const std::vector<double>& t_values) {
  if (d < 1) throw ConfigError("dimension must be positive");
  for (double e : etas) require_positive(e, "eta");
  for (double t : t_values) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw ConfigError("t values must be nonnegative");
  }
  RegimeTable table;
  table.d = d;
  table.etas = etas;
  for (double t : t_values) {
    RegimeTable::Row row;
    row.t = t;
    row.log_concave_exponent = t == 0.0 ? 0.0 : -std::min(t, t * t / d);
    for (double e : etas) row.exp_concave_exponents.push_back(t == 0.0 ? 0.0 : -std::max(std::sqrt(e), e) * t);
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string RegimeTable::text() const {
  std::vector<std::string> header{"t", "log_concave"};
  for (double e : etas) header.push_back("exp_concave(eta=" + io::format_double(e) + ")");
  std::vector<std::vector<std::string>> cells{header};
  for (const auto& r : rows) {
    std::vector<std::string> line{io::format_double(r.t), io::format_double(r.log_concave_exponent)};
    for (double x : r.exp_concave_exponents) line.push_back(io::format_double(x));
    cells.push_back(std::move(line));
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& line : cells)
    for (std::size_t j = 0; j < line.size(); ++j) width[j] = std::max(width[j], line[j].size());
  std::ostringstream out;
  out << "exponent of P(|V - EV| > t), d = " << d << "\n";
  for (const auto& line : cells) {
    for (std::size_t j = 0; j < line.size(); ++j) {
      out << (j ? "  " : "") << std::setw(static_cast<int>(width[j])) << line[j];
    }
    out << "\n";
  }
  return out.str();
}

std::string RegimeTable::csv() const {
  std::vector<std::string> header{"t", "log_concave"};
  for (double e : etas) header.push_back("exp_concave_eta_" + io::format_double(e));
  std::string out = io::csv_row(header);
  for (const auto& r : rows) {
    std::vector<double> line{r.t, r.log_concave_exponent};
    line.insert(line.end(), r.exp_concave_exponents.begin(), r.exp_concave_exponents.end());
    out += io::csv_row(line);
  }
  return out;
}

}  // namespace expconc
