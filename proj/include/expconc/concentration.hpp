#pragma once

#include "expconc/samplers.hpp"
#include "expconc/stats.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace expconc {

/// Closed-form tail or moment bound. Tail kinds map a deviation t to a bound
/// on P(|V - EV| > t); mgf_product maps lambda to a bound on E e^{lambda(V-EV)}.
struct BoundSpec {
  enum class Kind { log_concave, exp_concave, iid_chernoff, mgf_product };

  Kind kind = Kind::exp_concave;
  int d = 1;
  double c1 = 1.0;
  double c2 = 1.0;
  double eta = 1.0;
  std::size_t n = 1;
  /// Truncation length for mgf_product.
  std::size_t terms = 60;

  double evaluate(double t) const;
  bool is_tail() const { return kind != Kind::mgf_product; }
  /// Kind name plus parameters, e.g. "exp_concave(eta=0.2)".
  std::string label() const;
};

std::string_view kind_name(BoundSpec::Kind k);

/// c1 exp(-c2 min(t, t^2/d)).
BoundSpec bound_log_concave(int d, double c1 = 1.0, double c2 = 1.0);
/// 6 exp(-max(sqrt(eta), eta) t).
BoundSpec bound_exp_concave(double eta);
/// 2 exp(-N (sqrt(eta) t - log 3)) for the mean of N i.i.d. draws.
BoundSpec bound_iid(double eta, std::size_t n);
BoundSpec bound_mgf_product(double eta, std::size_t terms = 60);

/// Truncated product prod_{k=1}^{K} (1 - lambda^2 / (4^{k+1} eta))^{-2^k},
/// nondecreasing in K. Throws std::domain_error when lambda^2 >= 16 eta.
double mgf_product_partial(double lambda, double eta, std::size_t terms);

/// The truncated product times a rigorous bound on the omitted factors, so an
/// upper bound on the infinite product for every K (nonincreasing in K).
double mgf_product_bound(double lambda, double eta, std::size_t terms);

struct TailReport {
  std::vector<double> t_grid;
  std::vector<double> empirical_survival;
  std::vector<double> survival_ucb;
  std::vector<std::size_t> exceedances;
  std::size_t sample_size = 0;
  double confidence = 0.99;
  std::vector<BoundSpec> bounds;
  /// bound_values[j][i] = bounds[j].evaluate(t_grid[i])
  std::vector<std::vector<double>> bound_values;
  double mean_v = 0.0;
  /// Standard error of mean_v, i.e. the centering uncertainty.
  double mean_standard_error = 0.0;
  double var_v = 0.0;

  /// True when survival_ucb <= bound at every t where the bound is below 1.
  bool dominated_by(std::size_t bound_index) const;
  /// Columns t,empirical,ucb,bound_<label>...
  std::string csv() const;
};

/// Survival of |v - mean(v)| over the grid. Values are centred through
/// differences to v[0], so adding a constant to every value leaves the report
/// unchanged apart from mean_v whenever the shift is exact in floating point.
TailReport estimate_tails(std::span<const double> v_values, const std::vector<double>& t_grid,
                          const std::vector<BoundSpec>& bounds, double confidence = 0.99);
TailReport estimate_tails(const SampleBatch& batch, const std::vector<double>& t_grid,
                          const std::vector<BoundSpec>& bounds, double confidence = 0.99);

/// Empirical E exp(lambda (V - mean V)) with its standard error, in log-sum-exp form.
Estimate estimate_mgf(std::span<const double> v_values, double lambda);
Estimate estimate_mgf(const SampleBatch& batch, double lambda);

struct VarianceReport {
  Estimate variance;
  int dimension = 1;
  std::optional<double> eta;
  double allowance_se = 4.0;
  bool within_dimension = true;
  /// Set when eta is given.
  std::optional<bool> within_inverse_eta;

  bool passed() const { return within_dimension && within_inverse_eta.value_or(true); }
};

VarianceReport estimate_variance_bounds(std::span<const double> v_values, std::optional<double> eta,
                                        int d);
VarianceReport estimate_variance_bounds(const SampleBatch& batch, std::optional<double> eta, int d);

/// Exponent orders of the tail bounds per (t, eta), against the log-concave
/// baseline min(t, t^2/d).
struct RegimeTable {
  struct Row {
    double t;
    double log_concave_exponent;
    std::vector<double> exp_concave_exponents;  ///< one per eta
  };
  int d = 1;
  std::vector<double> etas;
  std::vector<Row> rows;

  std::string text() const;
  std::string csv() const;
};

RegimeTable regime_table(const std::vector<double>& etas, int d, const std::vector<double>& t_values);

}  // namespace expconc
