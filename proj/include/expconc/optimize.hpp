#pragma once

#include "expconc/potential.hpp"

#include <optional>

namespace expconc {

struct MinimizeOptions {
  /// Stop when |x - P(x - grad V(x))| falls below this.
  double tolerance = 1e-9;
  std::size_t max_iterations = 100000;
};

struct MinimizeResult {
  Vector x;
  double value = 0.0;
  /// Gradient mapping norm |x - P(x - grad V(x))| at the returned point.
  double residual = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Projected gradient descent with Barzilai-Borwein trial steps and
/// backtracking on a box, simplex or full-space support. Indicator terms are
/// handled by the projection; other kinks are outside its contract.
MinimizeResult minimize(const Potential& p, std::optional<Vector> start = std::nullopt,
                        const MinimizeOptions& options = {});

}  // namespace expconc
