#include <doctest.h>

#include "expconc/io.hpp"
#include "expconc/stats.hpp"

#include <cmath>
#include <limits>
#include <vector>

using namespace expconc;

TEST_SUITE("stats") {

TEST_CASE("compensated sum recovers cancelled terms") {
  CompensatedSum s;
  s.add(1.0);
  s.add(1e100);
  s.add(1.0);
  s.add(-1e100);
  CHECK(s.value() == 2.0);
}

TEST_CASE("jackknife variance matches the textbook formula") {
  const std::vector<double> x{1.0, 2.0, 4.0, 7.0, 11.0};
  const auto est = variance_jackknife(x);
  CHECK(est.value == doctest::Approx(16.5));
  // Brute-force leave-one-out oracle.
  const double n = 5;
  std::vector<double> loo;
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::vector<double> y;
    for (std::size_t j = 0; j < x.size(); ++j)
      if (j != i) y.push_back(x[j]);
    double m = 0;
    for (double v : y) m += v;
    m /= 4;
    double s = 0;
    for (double v : y) s += (v - m) * (v - m);
    loo.push_back(s / 3);
  }
  double lm = 0;
  for (double v : loo) lm += v;
  lm /= n;
  double jv = 0;
  for (double v : loo) jv += (v - lm) * (v - lm);
  jv *= (n - 1) / n;
  CHECK(est.standard_error == doctest::Approx(std::sqrt(jv)).epsilon(1e-12));
}

TEST_CASE("clopper-pearson upper bound") {
  // Zero successes: 1 - alpha^{1/n}.
  CHECK(clopper_pearson_upper(0, 100, 0.99) == doctest::Approx(1.0 - std::pow(0.01, 0.01)).epsilon(1e-10));
  CHECK(clopper_pearson_upper(10, 10) == 1.0);
  const double u = clopper_pearson_upper(50, 1000);
  CHECK(u > 0.05);
  CHECK(u < 0.07);
  CHECK(clopper_pearson_upper(51, 1000) > u);
}

TEST_CASE("quantile type 7") {
  const std::vector<double> x{3.0, 1.0, 2.0, 4.0};
  CHECK(quantile(x, 0.0) == 1.0);
  CHECK(quantile(x, 1.0) == 4.0);
  CHECK(quantile(x, 0.5) == doctest::Approx(2.5));
}

TEST_CASE("float formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -0.0, 2.0}) {
    CHECK(std::stod(io::format_double(v)) == v);
  }
  CHECK(io::format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(io::csv_row(std::vector<std::string>{"a", "b,c", "d\"e"}) == "a,\"b,c\",\"d\"\"e\"\r\n");
}

}
