#include <doctest.h>

#include "expconc/expconcavity.hpp"
#include "helpers.hpp"

#include <cmath>
#include <limits>

using namespace expconc;
using testing_support::interior_sample;

namespace {

Potential five_neg_log() {
  std::vector<std::pair<Potential, double>> parts;
  for (int i = 0; i < 5; ++i) parts.push_back({lift_coordinate(builtin::neg_log(1), 5, i), 1.0});
  return compose_sum(parts);
}

SampleBatch points_of(const Potential& p, int n, std::uint64_t seed) {
  CounterRng rng(seed, 0);
  SampleBatch b;
  b.points.resize(n, p.dimension());
  for (int i = 0; i < n; ++i) {
    const Vector x = interior_sample(p, rng);
    b.points.row(i) = x.transpose();
    b.v_values.push_back(p.value(x));
  }
  return b;
}

// Independent oracle: 1 / g' H^{-1} g through a full-pivot LU solve.
double lu_local_eta(const Potential& p, const Vector& x) {
  const Vector g = p.gradient(x);
  return 1.0 / g.dot(p.hessian(x).fullPivLu().solve(g));
}

}  // namespace

TEST_SUITE("expconcavity") {

TEST_CASE("local eta examples") {
  const auto nl = builtin::neg_log(1);
  CHECK(local_eta(nl, Vector::Constant(1, 0.3)) == doctest::Approx(1.0).epsilon(1e-14));
  const auto g = builtin::gaussian(3);
  CHECK(local_eta(g, Vector::Unit(3, 0)) == doctest::Approx(1.0));
  CHECK(local_eta(g, Vector::Zero(3)) == std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(local_eta(builtin::exponential(2), Vector::Constant(2, 1.0)), NotExpConcaveAtPoint);
}

TEST_CASE("local eta agrees with an LU oracle") {
  Matrix a(3, 2);
  a << 1.0, 0.5, -0.3, 1.2, 0.7, -0.8;
  CounterRng rng(2, 0);
  for (const auto& p : {builtin::logistic(a), five_neg_log(),
                        builtin::portfolio_log_loss(testing_support::two_row_portfolio())}) {
    for (int i = 0; i < 50; ++i) {
      const Vector x = interior_sample(p, rng);
      CHECK(local_eta(p, x) == doctest::Approx(lu_local_eta(p, x)).epsilon(1e-10));
    }
  }
}

TEST_CASE("certificates") {
  const auto nl = builtin::neg_log(1);
  const auto cert = certify(nl, points_of(nl, 100, 3), 1.0);
  CHECK(cert.violations.empty());
  CHECK(cert.mode == EtaCertificate::Mode::certify_declared);
  CHECK(std::abs(cert.global_eta - 1.0) <= 1e-8);

  const auto five = five_neg_log();
  const auto est = certify(five, points_of(five, 500, 4));
  CHECK(est.mode == EtaCertificate::Mode::estimate);
  CHECK(std::abs(est.global_eta - 0.2) <= 1e-8);
  for (std::size_t i = 0; i < est.points.size(); ++i)
    CHECK(est.local_eta[i] == doctest::Approx(lu_local_eta(five, est.points[i])).epsilon(1e-10));

  const auto ex = builtin::exponential(2);
  const auto batch = points_of(ex, 100, 5);
  for (double eta : {0.01, 0.1, 1.0}) {
    const auto rejected = certify(ex, batch, eta);
    CHECK(rejected.violations.size() == batch.size());
  }
  CHECK_THROWS(certify(nl, SampleBatch{}, 1.0));
}

TEST_CASE("global eta ignores the infinite sentinel") {
  const auto g = builtin::gaussian(2);
  SampleBatch b;
  b.points.resize(2, 2);
  b.points.row(0) = Vector::Zero(2).transpose();
  b.points.row(1) = Vector::Constant(2, 2.0).transpose();
  b.v_values = {0.0, 4.0};
  const auto cert = certify(g, b);
  CHECK(cert.local_eta[0] == std::numeric_limits<double>::infinity());
  CHECK(cert.global_eta == doctest::Approx(1.0 / 8.0));
  SampleBatch origin;
  origin.points = Matrix::Zero(1, 2);
  origin.v_values = {0.0};
  CHECK(certify(g, origin).global_eta == std::numeric_limits<double>::infinity());
}

TEST_CASE("gradient lies in the Hessian range for exp-concave potentials") {
  Matrix a(1, 5);
  a << 0.3, -1.0, 0.5, 0.8, -0.2;
  const auto p = builtin::logistic(a);
  CounterRng rng(6, 0);
  for (int i = 0; i < 100; ++i) {
    Vector x(5);
    for (int j = 0; j < 5; ++j) x[j] = rng.normal();
    CHECK(project_gradient_check(p, x) <= 1e-8 * (1.0 + p.gradient(x).norm()));
    // rank-deficient Hessian: local eta goes through the pseudo-inverse
    const double z = a.row(0).dot(x);
    const double s = 1.0 / (1.0 + std::exp(z));
    CHECK(local_eta(p, x) == doctest::Approx((1.0 - s) / s).epsilon(1e-8));
  }
  CHECK(project_gradient_check(builtin::neg_log(1), Vector::Constant(1, 0.4)) == 0.0);
  Matrix q = Matrix::Zero(2, 2);
  q(0, 0) = 1.0;
  const auto counter = builtin::quadratic(q, Vector::Unit(2, 1));
  CHECK(project_gradient_check(counter, Vector::Zero(2)) == doctest::Approx(1.0));
  CHECK_THROWS_AS(local_eta(counter, Vector::Zero(2)), NotExpConcaveAtPoint);
}

TEST_CASE("regularised local eta") {
  const auto nl = builtin::neg_log(1);
  const Vector x = Vector::Constant(1, 0.5);
  double previous = std::numeric_limits<double>::infinity();
  for (double eps : {1e-2, 1e-4, 1e-6}) {
    const double value = regularized_local_eta(nl, x, eps);
    CHECK(value == doctest::Approx(1.0 + eps * 0.25).epsilon(1e-14));
    CHECK(value <= previous);
    previous = value;
  }
  CHECK(regularized_local_eta(builtin::gaussian(2), Vector::Zero(2), 1e-3) ==
        std::numeric_limits<double>::infinity());

  Matrix a(1, 5);
  a << 0.3, -1.0, 0.5, 0.8, -0.2;
  const auto logistic = builtin::logistic(a, 1.0);
  const Vector y = Vector::Constant(5, 0.2);
  CHECK(regularized_local_eta(logistic, y, 1e-6) >= *logistic.known_eta() * (1.0 - 1e-6));
  CHECK(regularized_local_eta(logistic, y, 1e-6) >= local_eta(logistic, y) * (1.0 - 1e-6));
}

TEST_CASE("scale law, eps monotonicity and agreement") {
  Matrix a(3, 2);
  a << 1.0, 0.5, -0.3, 1.2, 0.7, -0.8;
  CounterRng rng(7, 0);
  for (const auto& p : {builtin::logistic(a), five_neg_log(), builtin::gaussian(2)}) {
    for (double c : {0.1, 2.0, 50.0}) {
      const auto cp = scaled(p, c);
      for (int i = 0; i < 20; ++i) {
        const Vector x = interior_sample(p, rng);
        CHECK(local_eta(cp, x) == doctest::Approx(local_eta(p, x) / c).epsilon(1e-9));
      }
    }
    for (int i = 0; i < 20; ++i) {
      const Vector x = interior_sample(p, rng);
      double last = 0.0;
      for (double eps : {1e-10, 1e-6, 1e-3, 1e-1, 10.0}) {
        const double v = regularized_local_eta(p, x, eps);
        CHECK(v >= last - 1e-12);
        last = v;
      }
      CHECK(regularized_local_eta(p, x, 1e-10) == doctest::Approx(local_eta(p, x)).epsilon(1e-6));
    }
  }
}

TEST_CASE("declared eta never exceeds local eta on certified points") {
  const auto five = five_neg_log();
  const auto cert = certify(five, points_of(five, 300, 8), five.known_eta());
  REQUIRE(cert.violations.empty());
  for (double v : cert.local_eta) CHECK(v >= *five.known_eta() - 1e-8);
}

TEST_CASE("certification points mix samples and a Halton grid") {
  const auto five = five_neg_log();
  const auto pts = certification_points(five, 100, 50, 9);
  CHECK(pts.size() == 150);
  for (std::size_t i = 0; i < pts.size(); ++i) CHECK(five.support().contains(pts.point(i)));
  CHECK(halton_point(1, 2)[0] == 0.5);
  CHECK(halton_point(1, 2)[1] == doctest::Approx(1.0 / 3.0));
  const auto simplex_pts =
      certification_points(builtin::portfolio_log_loss(testing_support::two_row_portfolio()), 20, 30, 1);
  CHECK(simplex_pts.size() == 50);
}

}
