#include <doctest.h>

#include "expconc/rng.hpp"
#include "expconc/support.hpp"

#include <cmath>

using namespace expconc;

TEST_SUITE("support") {

TEST_CASE("box membership honours open ends") {
  const auto s = SupportSpec::box({Interval{0.0, 1.0, true, true}});
  CHECK(s.contains(Vector::Constant(1, 0.5)));
  CHECK_FALSE(s.contains(Vector::Constant(1, 0.0)));
  CHECK_FALSE(s.contains(Vector::Constant(1, 1.0)));
  CHECK(s.contains(Vector::Constant(1, 1.0 - 2e-12)));
  CHECK(s.bounded());
  CHECK_THROWS(SupportSpec::box({Interval{1.0, 0.0, false, false}}));
}

TEST_CASE("interior points are members") {
  CHECK(SupportSpec::full(3).contains(SupportSpec::full(3).interior_point()));
  CHECK(SupportSpec::simplex(2).contains(SupportSpec::simplex(2).interior_point()));
  const auto ball = SupportSpec::convex(
      2, [](const Vector& x) { return x.norm() <= 1.0; }, Vector::Zero(2), 1.0);
  CHECK(ball.contains(ball.interior_point()));
  CHECK(ball.bounded());
}

TEST_CASE("chords stay inside") {
  CounterRng rng(1, 0);
  const auto simplex = SupportSpec::simplex(3);
  const auto ball = SupportSpec::convex(
      3, [](const Vector& x) { return x.norm() <= 1.0; }, Vector::Zero(3), 1.0);
  const auto box = SupportSpec::box(std::vector<Interval>(3, Interval{0.0, 1.0, true, true}));
  for (const auto* s : {&simplex, &ball, &box}) {
    for (int i = 0; i < 200; ++i) {
      Vector dir(3);
      for (int j = 0; j < 3; ++j) dir[j] = rng.normal();
      dir.normalize();
      const Vector x = s->interior_point();
      const auto [lo, hi] = s->chord(x, dir);
      CHECK(lo <= 0.0);
      CHECK(hi >= 0.0);
      CHECK(s->contains(x + lo * dir));
      CHECK(s->contains(x + hi * dir));
    }
  }
  // the ball chord through the centre has length 2
  const auto [lo, hi] = ball.chord(Vector::Zero(3), Vector::Unit(3, 0));
  CHECK(hi - lo == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("intersection and projection") {
  const auto a = SupportSpec::closed_box(2, -1.0, 1.0);
  const auto b = SupportSpec::box(std::vector<Interval>(2, Interval{0.0, 5.0, true, false}));
  const auto c = a.intersect(b);
  CHECK(c.contains(Vector::Constant(2, 0.5)));
  CHECK_FALSE(c.contains(Vector::Constant(2, -0.5)));
  const auto far = SupportSpec::closed_box(2, 3.0, 4.0);
  CHECK_THROWS(a.intersect(far));
  const Vector p = project_probability_simplex(Vector::Constant(3, 1.0));
  CHECK(p.sum() == doctest::Approx(1.0));
  CHECK(p[0] == doctest::Approx(1.0 / 3.0));
  const auto s = SupportSpec::simplex(2);
  const Vector q = s.project(Vector::Constant(2, 2.0));
  CHECK(s.contains(q));
  CHECK(q.sum() == doctest::Approx(1.0));
}

}
