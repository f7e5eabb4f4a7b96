#pragma once

#include "expconc/potential.hpp"
#include "expconc/rng.hpp"

#include <cmath>
#include <vector>

namespace testing_support {

using expconc::Matrix;
using expconc::Potential;
using expconc::Vector;

/// Random point strictly inside the support, away from open boundaries.
inline Vector interior_sample(const Potential& p, expconc::CounterRng& rng) {
  const int d = p.dimension();
  const auto& s = p.support();
  for (int attempt = 0; attempt < 10000; ++attempt) {
    Vector x(d);
    for (int j = 0; j < d; ++j) {
      const auto& b = s.box_bounds()[j];
      double lo = b.lo;
      double hi = b.hi;
      if (s.has_simplex()) {
        lo = std::max(lo, 0.0);
        hi = std::min(hi, 1.0);
      }
      if (std::isfinite(lo) && std::isfinite(hi)) {
        x[j] = lo + (hi - lo) * (0.02 + 0.96 * rng.uniform());
      } else if (std::isfinite(lo)) {
        x[j] = lo + 0.05 + 3.0 * rng.exponential();
      } else if (std::isfinite(hi)) {
        x[j] = hi - 0.05 - 3.0 * rng.exponential();
      } else {
        x[j] = 2.0 * rng.normal();
      }
    }
    if (s.has_simplex() && x.sum() > 0.98) continue;
    if (s.contains(x)) return x;
  }
  throw std::runtime_error("no interior sample found");
}

inline Matrix two_row_portfolio() {
  Matrix a(4, 3);
  a << 1.10, 0.90, 1.00,
       0.80, 1.30, 1.00,
       1.05, 1.00, 0.95,
       0.95, 1.10, 1.02;
  return a;
}

}  // namespace testing_support
