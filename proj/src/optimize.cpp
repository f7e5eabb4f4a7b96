#include "expconc/optimize.hpp"

#include <algorithm>
#include <cmath>

namespace expconc {

MinimizeResult minimize(const Potential& p, std::optional<Vector> start, const MinimizeOptions& options) {
  const SupportSpec& support = p.support();
  auto project = [&](const Vector& y) {
    return support.kind() == SupportSpec::Kind::full ? y : support.project(y);
  };
  Vector x = start ? project(*start) : support.interior_point();
  if (!support.contains(x)) x = support.interior_point();
  double v = p.value(x);
  Vector g = p.gradient(x);
  double step = 1.0 / std::max(1.0, g.norm());

  MinimizeResult result;
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    result.residual = (x - project(x - g)).norm();
    if (result.residual <= options.tolerance) {
      result.converged = true;
      result.iterations = it;
      break;
    }
    Vector next;
    double v_next = 0.0;
    for (int backtrack = 0;; ++backtrack) {
      next = project(x - step * g);
      const Vector move = next - x;
      bool inside = support.contains(next);
      if (inside) {
        v_next = p.value(next);
        if (std::isfinite(v_next) &&
            v_next <= v + g.dot(move) + 0.5 / step * move.squaredNorm() + 1e-15 * std::abs(v))
          break;
      }
      step *= 0.5;
      if (step < 1e-300 || backtrack > 2000) {
        result.x = x;
        result.value = v;
        result.iterations = it;
        return result;
      }
    }
    const Vector g_next = p.gradient(next);
    const Vector s = next - x;
    const Vector y = g_next - g;
    const double sy = s.dot(y);
    // Barzilai-Borwein trial step for the next iteration
    step = sy > 0.0 ? std::clamp(s.squaredNorm() / sy, 1e-12, 1e12) : 2.0 * step;
    x = next;
    v = v_next;
    g = g_next;
    result.iterations = it + 1;
  }
  result.x = x;
  result.value = v;
  if (!result.converged) {
    result.residual = (x - project(x - g)).norm();
    result.converged = result.residual <= options.tolerance;
  }
  return result;
}

}  // namespace expconc
