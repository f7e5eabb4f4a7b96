#include "expconc/stats.hpp"

#include <boost/math/distributions/binomial.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace expconc {

void CompensatedSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    compensation_ += (sum_ - t) + x;
  } else {
    compensation_ += (x - t) + sum_;
  }
  sum_ = t;
}

double compensated_mean(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("mean of an empty sequence");
  CompensatedSum s;
  for (double v : x) s.add(v);
  return s.value() / static_cast<double>(x.size());
}

Estimate mean_estimate(std::span<const double> x) {
  const double m = compensated_mean(x);
  if (x.size() < 2) return {m, 0.0};
  CompensatedSum ss;
  for (double v : x) ss.add((v - m) * (v - m));
  const double n = static_cast<double>(x.size());
  return {m, std::sqrt(ss.value() / (n - 1.0) / n)};
}

Estimate variance_jackknife(std::span<const double> x) {
  const std::size_t size = x.size();
  if (size < 3) throw std::invalid_argument("jackknife variance needs at least 3 points");
  const double n = static_cast<double>(size);
  const double m = compensated_mean(x);
  CompensatedSum ss;
  for (double v : x) ss.add((v - m) * (v - m));
  const double total = ss.value();
  const double variance = total / (n - 1.0);
  // leave-one-out: S_(i) = S - n/(n-1) (x_i - m)^2, var_(i) = S_(i) / (n - 2)
  CompensatedSum loo_sum;
  std::vector<double> loo(size);
  for (std::size_t i = 0; i < size; ++i) {
    const double dev = x[i] - m;
    loo[i] = (total - n / (n - 1.0) * dev * dev) / (n - 2.0);
    loo_sum.add(loo[i]);
  }
  const double loo_mean = loo_sum.value() / n;
  CompensatedSum spread;
  for (double v : loo) spread.add((v - loo_mean) * (v - loo_mean));
  return {variance, std::sqrt((n - 1.0) / n * spread.value())};
}

double clopper_pearson_upper(std::size_t successes, std::size_t trials, double confidence) {
  if (trials == 0) throw std::invalid_argument("Clopper-Pearson bound needs at least one trial");
  if (successes > trials) throw std::invalid_argument("more successes than trials");
  if (!(confidence > 0.0 && confidence < 1.0)) throw std::invalid_argument("confidence must be in (0,1)");
  if (successes == trials) return 1.0;
  using boost::math::binomial_distribution;
  return binomial_distribution<>::find_upper_bound_on_p(
      static_cast<double>(trials), static_cast<double>(successes), 1.0 - confidence,
      binomial_distribution<>::clopper_pearson_exact_interval);
}

double ks_distance(std::span<const double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw std::invalid_argument("KS distance of an empty sample");
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

double quantile(std::span<const double> x, double probability) {
  if (x.empty()) throw std::invalid_argument("quantile of an empty sequence");
  if (!(probability >= 0.0 && probability <= 1.0)) throw std::invalid_argument("probability outside [0,1]");
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = (static_cast<double>(sorted.size()) - 1.0) * probability;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace expconc
