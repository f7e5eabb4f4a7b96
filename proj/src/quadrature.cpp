#include "expconc/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace expconc::quadrature {
namespace {

constexpr int kOrder = 10;

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

const Rule& rule() {
  static const Rule r = [] {
    auto [n, w] = gauss_legendre(kOrder);
    return Rule{std::move(n), std::move(w)};
  }();
  return r;
}

Eigen::ArrayXd apply(const Integrand& f, int components, double a, double b, Eigen::ArrayXd& abs_out) {
  const Rule& r = rule();
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  Eigen::ArrayXd sum = Eigen::ArrayXd::Zero(components);
  abs_out = Eigen::ArrayXd::Zero(components);
  for (std::size_t k = 0; k < r.nodes.size(); ++k) {
    const Eigen::ArrayXd y = f(mid + half * r.nodes[k]);
    sum += r.weights[k] * y;
    abs_out += r.weights[k] * y.abs();
  }
  abs_out *= half;
  return sum * half;
}

struct Cell {
  double a, b;
  Eigen::ArrayXd value;  // refined (two-halves) estimate
  Eigen::ArrayXd magnitude;
  Eigen::ArrayXd error;
};

Cell make_cell(const Integrand& f, int components, double a, double b, const Eigen::ArrayXd& coarse) {
  const double m = 0.5 * (a + b);
  Eigen::ArrayXd abs_l, abs_r;
  const Eigen::ArrayXd left = apply(f, components, a, m, abs_l);
  const Eigen::ArrayXd right = apply(f, components, m, b, abs_r);
  return Cell{a, b, left + right, abs_l + abs_r, (left + right - coarse).abs()};
}

}  // namespace

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  std::vector<double> nodes(n), weights(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    nodes[n - 1 - i] = x;
    weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return {nodes, weights};
}

Eigen::ArrayXd integrate(const Integrand& f, int components, double a, double b, const Options& options) {
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b))
    throw std::invalid_argument("integration needs finite a < b");
  Eigen::ArrayXd abs0;
  const Eigen::ArrayXd coarse = apply(f, components, a, b, abs0);
  std::vector<Cell> cells{make_cell(f, components, a, b, coarse)};

  auto totals = [&](Eigen::ArrayXd& value, Eigen::ArrayXd& magnitude, Eigen::ArrayXd& error) {
    value = Eigen::ArrayXd::Zero(components);
    magnitude = Eigen::ArrayXd::Zero(components);
    error = Eigen::ArrayXd::Zero(components);
    for (const auto& c : cells) {
      value += c.value;
      magnitude += c.magnitude;
      error += c.error;
    }
  };
  Eigen::ArrayXd value, magnitude, error;
  while (true) {
    totals(value, magnitude, error);
    const Eigen::ArrayXd allowed = options.rel_tol * magnitude.max(1e-300);
    if ((error <= allowed).all()) return value;
    if (cells.size() >= options.max_intervals) break;
    // split the cell with the largest error relative to its component's allowance
    std::size_t worst = 0;
    double worst_ratio = -1.0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const double ratio = (cells[i].error / allowed).maxCoeff();
      if (ratio > worst_ratio) {
        worst_ratio = ratio;
        worst = i;
      }
    }
    const Cell c = cells[worst];
    const double m = 0.5 * (c.a + c.b);
    if (!(m > c.a && m < c.b)) break;
    Eigen::ArrayXd abs_l, abs_r;
    const Eigen::ArrayXd left_coarse = apply(f, components, c.a, m, abs_l);
    const Eigen::ArrayXd right_coarse = apply(f, components, m, c.b, abs_r);
    cells[worst] = make_cell(f, components, c.a, m, left_coarse);
    cells.push_back(make_cell(f, components, m, c.b, right_coarse));
  }
  const Eigen::ArrayXd relative = error / magnitude.max(1e-300);
  if ((relative > options.failure_tol).any()) {
    std::ostringstream msg;
    msg << "quadrature did not converge on [" << a << ", " << b << "]: relative error "
        << relative.maxCoeff();
    throw QuadratureError(msg.str());
  }
  return value;
}

double integrate(const std::function<double(double)>& f, double a, double b, const Options& options) {
  auto wrapped = [&](double x) { return Eigen::ArrayXd::Constant(1, f(x)); };
  return integrate(wrapped, 1, a, b, options)[0];
}

Eigen::ArrayXd integrate_segments(const Integrand& f, int components, const std::vector<double>& knots,
                                  const Options& options) {
  if (knots.size() < 2) throw std::invalid_argument("need at least two knots");
  Eigen::ArrayXd total = Eigen::ArrayXd::Zero(components);
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    if (!(knots[i] < knots[i + 1])) throw std::invalid_argument("knots must be increasing");
    total += integrate(f, components, knots[i], knots[i + 1], options);
  }
  return total;
}

Eigen::ArrayXd integrate_box(const BoxIntegrand& f, int components,
                             const std::vector<std::vector<double>>& knots, const Options& options) {
  const int d = static_cast<int>(knots.size());
  if (d < 1) throw std::invalid_argument("box integration needs a dimension");
  Vector x(d);
  std::function<Eigen::ArrayXd(int)> level = [&](int j) -> Eigen::ArrayXd {
    auto inner = [&, j](double t) -> Eigen::ArrayXd {
      x[j] = t;
      return j + 1 == d ? f(x) : level(j + 1);
    };
    return integrate_segments(inner, components, knots[j], options);
  };
  return level(0);
}

}  // namespace expconc::quadrature
