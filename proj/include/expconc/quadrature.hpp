#pragma once

#include "expconc/types.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace expconc::quadrature {

struct Options {
  double rel_tol = 1e-10;
  /// Give up refining after this many subintervals per segment.
  std::size_t max_intervals = 4000;
  /// Non-convergence is an error when the final relative error estimate exceeds this.
  double failure_tol = 1e-8;
};

using Integrand = std::function<Eigen::ArrayXd(double)>;
using BoxIntegrand = std::function<Eigen::ArrayXd(const Vector&)>;

/// Gauss-Legendre nodes and weights on [-1, 1].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n);

/// Globally adaptive Gauss-Legendre integration of a vector integrand over
/// [a, b]. An interval's error is the change between one rule on the interval
/// and the same rule on its halves; the worst interval is split until every
/// component's error is below rel_tol times the integral of its absolute value.
Eigen::ArrayXd integrate(const Integrand& f, int components, double a, double b,
                         const Options& options = {});
double integrate(const std::function<double(double)>& f, double a, double b, const Options& options = {});

/// Sum over consecutive knots, so kinks at the knots never sit inside a cell.
Eigen::ArrayXd integrate_segments(const Integrand& f, int components, const std::vector<double>& knots,
                                  const Options& options = {});

/// Nested tensor integration over a box; knots[j] are the sorted cell ends of coordinate j.
Eigen::ArrayXd integrate_box(const BoxIntegrand& f, int components,
                             const std::vector<std::vector<double>>& knots, const Options& options = {});

}  // namespace expconc::quadrature
