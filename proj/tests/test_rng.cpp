#include <doctest.h>

#include "expconc/rng.hpp"
#include "expconc/stats.hpp"

#include <cmath>
#include <vector>

using namespace expconc;

TEST_SUITE("rng") {

TEST_CASE("philox4x32-10 known answers") {
  using W = std::array<std::uint32_t, 4>;
  CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == W{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
        W{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
        W{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are reproducible and distinct") {
  CounterRng a(42, 0), b(42, 0), c(42, 1), d(43, 0);
  for (int i = 0; i < 100; ++i) {
    const auto va = a();
    CHECK(va == b());
    CHECK(va != c());
    CHECK(va != d());
  }
}

TEST_CASE("uniform and normal moments") {
  CounterRng rng(7, 3);
  const int n = 200000;
  std::vector<double> u(n), z(n), e(n);
  for (int i = 0; i < n; ++i) {
    u[i] = rng.uniform();
    REQUIRE(u[i] > 0.0);
    REQUIRE(u[i] < 1.0);
  }
  for (int i = 0; i < n; ++i) z[i] = rng.normal();
  for (int i = 0; i < n; ++i) e[i] = rng.exponential();
  CHECK(compensated_mean(u) == doctest::Approx(0.5).epsilon(0.01));
  CHECK(std::abs(compensated_mean(z)) < 0.01);
  CHECK(variance_jackknife(z).value == doctest::Approx(1.0).epsilon(0.02));
  CHECK(compensated_mean(e) == doctest::Approx(1.0).epsilon(0.01));
  CHECK(ks_distance(u, [](double x) { return x; }) < 0.01);
}

}
