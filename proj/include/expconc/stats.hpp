#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace expconc {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

double compensated_mean(std::span<const double> x);

struct Estimate {
  double value = 0.0;
  double standard_error = 0.0;
};

/// Sample mean with standard error sd/sqrt(n).
Estimate mean_estimate(std::span<const double> x);

/// Unbiased sample variance with its jackknife standard error.
Estimate variance_jackknife(std::span<const double> x);

/// One-sided exact Clopper-Pearson upper bound on a binomial proportion
/// after `successes` out of `trials`, at the given confidence level.
double clopper_pearson_upper(std::size_t successes, std::size_t trials, double confidence = 0.99);

/// Kolmogorov-Smirnov sup distance between the empirical CDF and `cdf`.
double ks_distance(std::span<const double> sample, const std::function<double(double)>& cdf);

/// Empirical quantile (type 7, linear interpolation) of unsorted data.
double quantile(std::span<const double> x, double probability);

}  // namespace expconc
