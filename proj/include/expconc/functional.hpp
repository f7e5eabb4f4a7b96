#pragma once

#include "expconc/quadrature.hpp"
#include "expconc/samplers.hpp"
#include "expconc/stats.hpp"

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace expconc {

struct TestFunction {
  std::string label;
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
};

namespace test_function {
/// f(x) = <c, x>
TestFunction linear(const Vector& c);
/// f(x) = <c, x>^2
TestFunction square(const Vector& c);
/// f(x) = tanh(<c, x>)
TestFunction tanh(const Vector& c);
TestFunction constant(int d, double k);
/// By name: linear, square, tanh or constant (constant uses c[0] as the value).
TestFunction make(std::string_view name, const Vector& c);
}  // namespace test_function

struct BlQuadratureResult {
  /// Var(f) under e^{-V}.
  double lhs = 0.0;
  /// Integral of <hess V^{-1} grad f, grad f> under e^{-V}.
  double rhs = 0.0;
  double mean_f = 0.0;
  /// lhs <= rhs + 1e-6 (1 + rhs)
  bool holds = true;
};

/// Both sides of the variance inequality by adaptive tensor Gauss-Legendre
/// quadrature, normalising constant included. Requires d <= 3, an interval
/// or box support, and a positive definite Hessian. Cells split at the
/// potential's breakpoints; unbounded coordinates are truncated where
/// V exceeds its smallest seen value by 80.
BlQuadratureResult bl_check_quadrature(const Potential& p, const TestFunction& f,
                                       const quadrature::Options& options = {});

struct BlMonteCarloResult {
  Estimate lhs;
  Estimate rhs;
  std::size_t solve_failures = 0;
  /// lhs - rhs > 4 (lhs_se + rhs_se)
  bool violation = false;
};

/// Monte Carlo estimates of both sides over a batch from e^{-V}. For
/// V = V1 + V2 the Hessian is V1's. Throws when the Hessian cannot be solved
/// against grad f at more than 0.1% of the points.
BlMonteCarloResult bl_check_montecarlo(const Potential& p, const TestFunction& f, const SampleBatch& batch);

/// log of the integral over (a, 1) of x^{1.25} e^{lambda (log x)^2}, computed
/// as the integral of exp(-2.25 u + lambda u^2) over (0, -log a).
std::vector<double> counterexample_divergence(double lambda, const std::vector<double>& truncations);
/// Two columns: truncation,log_integral.
std::string counterexample_csv(const std::vector<double>& truncations, const std::vector<double>& log_integrals);

/// Empirical E exp(lambda min((V - mean V)^2, clip)) per clip level.
std::vector<std::pair<double, double>> subgaussian_mgf_probe(std::span<const double> v_values, double lambda,
                                                             const std::vector<double>& clips);

}  // namespace expconc
