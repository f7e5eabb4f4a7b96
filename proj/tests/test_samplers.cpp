#include <doctest.h>

#include "expconc/rng.hpp"
#include "expconc/samplers.hpp"
#include "expconc/stats.hpp"

#include <cmath>
#include <sstream>

using namespace expconc;

namespace {

double x_squared(double x) { return x <= 0.0 ? 0.0 : (x >= 1.0 ? 1.0 : x * x); }

void check_batch_invariants(const Potential& p, const SampleBatch& b) {
  REQUIRE(static_cast<std::size_t>(b.points.rows()) == b.size());
  int outside = 0;
  int mismatched = 0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const Vector x = b.point(i);
    if (!p.support().contains(x)) ++outside;
    const double v = p.value(x);
    if (std::abs(v - b.v_values[i]) > 1e-12 * std::max(1.0, std::abs(v))) ++mismatched;
  }
  CHECK(outside == 0);
  CHECK(mismatched == 0);
}

}  // namespace

TEST_SUITE("samplers") {

TEST_CASE("exact neg_log sampler matches F(x) = x^2") {
  const auto p = builtin::neg_log(1);
  const auto b = sample_exact(p, 100000, 1);
  check_batch_invariants(p, b);
  CHECK(ks_distance(b.coordinate(0), x_squared) <= 0.006);
  CHECK(b.diagnostics.effective_sample_size == 100000);
  CHECK(b.diagnostics.acceptance_rate == 1.0);
}

TEST_CASE("exact gaussian and exponential samplers") {
  const auto g = sample_exact(builtin::gaussian(3), 100000, 2);
  CHECK(g.method == SamplingMethod::exact_gaussian);
  CHECK(g.points.colwise().mean().norm() <= 0.02);
  const auto e = sample_exact(builtin::exponential(1), 100000, 3);
  CHECK(e.method == SamplingMethod::exact_exponential);
  CHECK(std::abs(compensated_mean(e.coordinate(0)) - 1.0) <= 0.01);
  check_batch_invariants(builtin::exponential(1), e);
}

TEST_CASE("tabulated inverse CDF for a generic 1-D potential") {
  // V = x^2/2 + |x| has CDF computable from the normal CDF.
  const auto p = add_nonsmooth(builtin::gaussian(1), builtin::l1_norm(1));
  const auto b = sample_exact(p, 100000, 4);
  CHECK(b.method == SamplingMethod::exact_inverse_cdf);
  const double z = 2.0 * std::exp(0.5) * 0.5 * std::erfc(1.0 / std::sqrt(2.0));
  auto cdf = [&](double x) {
    // mass on (-inf, x] of e^{-x^2/2-|x|}, normalised by z
    const double phi = [&] {
      if (x <= 0.0) return std::exp(0.5) * 0.5 * std::erfc((1.0 - x) / std::sqrt(2.0));
      return std::exp(0.5) * 0.5 * std::erfc(1.0 / std::sqrt(2.0)) +
             std::exp(0.5) * (0.5 * std::erfc(1.0 / std::sqrt(2.0)) - 0.5 * std::erfc((x + 1.0) / std::sqrt(2.0)));
    }();
    return phi / z;
  };
  CHECK(ks_distance(b.coordinate(0), cdf) <= 0.006);
  TabulatedCdf table(p);
  for (double u : {1e-6, 0.01, 0.3, 0.5, 0.77, 0.999999}) {
    CHECK(table.cdf(table.inverse(u)) == doctest::Approx(u).epsilon(1e-9));
    CHECK(cdf(table.inverse(u)) == doctest::Approx(u).epsilon(1e-7));
  }
}

TEST_CASE("exact sampler rejects unsupported potentials") {
  Matrix a(1, 2);
  a << 1.0, 1.0;
  CHECK_THROWS_AS(sample_exact(builtin::logistic(a), 10, 1), ConfigError);
}

TEST_CASE("MALA on neg_log matches F(x) = x^2") {
  const auto p = builtin::neg_log(1);
  ChainConfig cfg;
  const auto b = sample_mcmc(p, 100000, SamplingMethod::mala, cfg, 5);
  check_batch_invariants(p, b);
  CHECK(b.size() == 100000);
  CHECK(ks_distance(b.coordinate(0), x_squared) <= 0.02);
  CHECK(b.diagnostics.acceptance_rate > 0.3);
  CHECK(b.diagnostics.effective_sample_size > 1000);
}

TEST_CASE("MALA gaussian d=10 variance of V") {
  ChainConfig cfg;
  const auto b = sample_mcmc(builtin::gaussian(10), 100000, SamplingMethod::mala, cfg, 6);
  const double var = variance_jackknife(b.v_values).value;
  CHECK(var >= 4.0);
  CHECK(var <= 6.0);
}

TEST_CASE("MALA moments on a 1-D gaussian") {
  ChainConfig cfg;
  const auto b = sample_mcmc(builtin::gaussian(1), 100000, SamplingMethod::mala, cfg, 7);
  const auto x = b.coordinate(0);
  // standard errors from the effective sample size
  const double n_eff = b.diagnostics.effective_sample_size;
  const double analytic[4] = {0.0, 1.0, 0.0, 3.0};
  const double moment_sd[4] = {1.0, std::sqrt(2.0), std::sqrt(15.0), std::sqrt(96.0)};
  for (int k = 1; k <= 4; ++k) {
    std::vector<double> powers(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) powers[i] = std::pow(x[i], k);
    const double m = compensated_mean(powers);
    CAPTURE(k);
    CHECK(std::abs(m - analytic[k - 1]) <= 4.0 * moment_sd[k - 1] / std::sqrt(n_eff));
  }
}

TEST_CASE("hit-and-run keeps points in the box and always accepts") {
  Matrix a(1, 2);
  a << 1.0, 1.0;
  const auto p = add_nonsmooth(builtin::logistic(a), builtin::box_indicator(2, -5.0, 5.0));
  ChainConfig cfg;
  cfg.burn_in = 2000;
  const auto b = sample_mcmc(p, 20000, SamplingMethod::hit_and_run, cfg, 8);
  check_batch_invariants(p, b);
  CHECK(b.diagnostics.acceptance_rate == 1.0);
  CHECK(b.points.cwiseAbs().maxCoeff() <= 5.0);
}

TEST_CASE("hit-and-run targets the right law") {
  const auto p = builtin::neg_log(1);
  ChainConfig cfg;
  cfg.burn_in = 1000;
  const auto b = sample_mcmc(p, 100000, SamplingMethod::hit_and_run, cfg, 12);
  CHECK(ks_distance(b.coordinate(0), x_squared) <= 0.02);
  // product law on (0,1)^2 with densities 2x and 3y^2
  const auto two = compose_sum({{lift_coordinate(builtin::neg_log(1), 2, 0), 1.0},
                                {lift_coordinate(builtin::neg_log(1, 2.0), 2, 1), 0.5}});
  const auto b2 = sample_mcmc(two, 100000, SamplingMethod::hit_and_run, cfg, 13);
  CHECK(ks_distance(b2.coordinate(0), x_squared) <= 0.02);
  CHECK(ks_distance(b2.coordinate(1), [](double y) { return y * y * y; }) <= 0.02);
}

TEST_CASE("hit-and-run on the portfolio simplex") {
  Matrix a(2, 3);
  a << 1.1, 0.9, 1.0, 0.8, 1.3, 1.0;
  const auto p = builtin::portfolio_log_loss(a);
  ChainConfig cfg;
  cfg.burn_in = 1000;
  const auto b = sample_mcmc(p, 5000, SamplingMethod::hit_and_run, cfg, 9);
  check_batch_invariants(p, b);
}

TEST_CASE("ULA runs and stays in the support") {
  ChainConfig cfg;
  cfg.step_size = 0.1;
  cfg.burn_in = 1000;
  const auto p = builtin::neg_log(2);
  const auto b = sample_mcmc(p, 10000, SamplingMethod::ula, cfg, 10);
  check_batch_invariants(p, b);
}

TEST_CASE("determinism across runs and chain counts") {
  const auto p = builtin::neg_log(1);
  ChainConfig cfg;
  cfg.burn_in = 500;
  const auto a = sample_mcmc(p, 4000, SamplingMethod::mala, cfg, 77);
  const auto b = sample_mcmc(p, 4000, SamplingMethod::mala, cfg, 77);
  CHECK(a.points == b.points);
  CHECK(a.v_values == b.v_values);
  // chain 0 of a four-chain run equals the first half of a two-chain run's chain 0 prefix
  ChainConfig two = cfg;
  two.n_chains = 2;
  const auto c = sample_mcmc(p, 2000, SamplingMethod::mala, two, 77);
  CHECK(a.points.topRows(500) == c.points.topRows(500));
  const auto e1 = sample_exact(p, 1000, 5);
  const auto e2 = sample_exact(p, 1000, 5);
  CHECK(e1.points == e2.points);
}

TEST_CASE("chain config validation") {
  ChainConfig cfg;
  cfg.step_size = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = ChainConfig{};
  cfg.target_acceptance = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = ChainConfig{};
  cfg.thinning = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("effective sample size") {
  CounterRng rng(3, 0);
  const int n = 10000;
  std::vector<double> iid(n), ar(n);
  for (int i = 0; i < n; ++i) iid[i] = rng.normal();
  ar[0] = rng.normal();
  for (int i = 1; i < n; ++i) ar[i] = 0.9 * ar[i - 1] + std::sqrt(1 - 0.81) * rng.normal();
  const double e_iid = ess(iid);
  CHECK(e_iid >= 0.9 * n);
  CHECK(e_iid <= 1.1 * n);
  const double e_ar = ess(ar);
  CHECK(e_ar >= 0.03 * n);
  CHECK(e_ar <= 0.08 * n);
  CHECK(ess(std::vector<double>(50, 2.5)) == 50);
  CHECK_THROWS(ess(std::vector<double>(5, 1.0)));
}

TEST_CASE("batch CSV export round-trips") {
  const auto b = sample_exact(builtin::gaussian(2), 5, 1);
  std::ostringstream out;
  write_csv(b, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "x0,x1,v\r");
  std::getline(in, line);
  const auto comma = line.find(',');
  CHECK(std::stod(line.substr(0, comma)) == b.points(0, 0));
}

}
