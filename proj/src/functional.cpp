#include "expconc/functional.hpp"

#include "expconc/expconcavity.hpp"
#include "expconc/io.hpp"
#include "expconc/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace expconc {
namespace {

constexpr double kWindow = 80.0;

void require_dimension(const Vector& c) {
  if (c.size() < 1) throw ConfigError("test function needs a nonempty coefficient vector");
}

struct Window {
  std::vector<std::vector<double>> knots;
  double reference = 0.0;
};

Window quadrature_window(const Potential& p) {
  const int d = p.dimension();
  const SupportSpec& s = p.support();
  if (s.kind() != SupportSpec::Kind::full && s.kind() != SupportSpec::Kind::box)
    throw ConfigError("quadrature needs an interval or box support");

  Vector centre = s.interior_point();
  try {
    const auto m = minimize(p);
    if (s.contains(m.x)) centre = m.x;
  } catch (const std::exception&) {
    // keep the interior point; the walk below still finds the mass
  }
  double reference = p.value(centre);
  Window w;
  w.knots.resize(d);
  for (int j = 0; j < d; ++j) {
    const Interval& b = s.box_bounds()[j];
    auto walk = [&](double sign) {
      const double wall = sign > 0 ? b.effective_hi() : b.effective_lo();
      double step = 1.0;
      Vector x = centre;
      for (int it = 0; it < 200; ++it) {
        const double next = x[j] + sign * step;
        if (std::isfinite(wall) && sign * (next - wall) >= 0.0) return wall;
        x[j] = next;
        const double v = p.value(x);
        reference = std::min(reference, v);
        if (v - reference > kWindow) return next;
        step *= 2.0;
      }
      throw ConfigError("density does not decay along a coordinate");
    };
    const double lo = walk(-1.0);
    const double hi = walk(1.0);
    std::vector<double> knots{lo, hi};
    for (double bp : p.breakpoints()) {
      if (bp > lo && bp < hi) knots.push_back(bp);
    }
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
    w.knots[j] = std::move(knots);
  }
  w.reference = reference;
  return w;
}

}  // namespace

namespace test_function {

TestFunction linear(const Vector& c) {
  require_dimension(c);
  return {"linear", [c](const Vector& x) { return c.dot(x); }, [c](const Vector&) { return Vector(c); }};
}

TestFunction square(const Vector& c) {
  require_dimension(c);
  return {"square", [c](const Vector& x) { const double z = c.dot(x); return z * z; },
          [c](const Vector& x) { return Vector(2.0 * c.dot(x) * c); }};
}

TestFunction tanh(const Vector& c) {
  require_dimension(c);
  return {"tanh", [c](const Vector& x) { return std::tanh(c.dot(x)); },
          [c](const Vector& x) {
            const double t = std::tanh(c.dot(x));
            return Vector((1.0 - t * t) * c);
          }};
}

TestFunction constant(int d, double k) {
  if (d < 1) throw ConfigError("dimension must be positive");
  return {"constant", [k](const Vector&) { return k; }, [d](const Vector&) { return Vector(Vector::Zero(d)); }};
}

TestFunction make(std::string_view name, const Vector& c) {
  if (name == "linear") return linear(c);
  if (name == "square") return square(c);
  if (name == "tanh") return tanh(c);
  if (name == "constant") {
    require_dimension(c);
    return constant(static_cast<int>(c.size()), c[0]);
  }
  throw ConfigError("unknown test function '" + std::string(name) + "'");
}

}  // namespace test_function

BlQuadratureResult bl_check_quadrature(const Potential& p, const TestFunction& f,
                                       const quadrature::Options& options) {
  const int d = p.dimension();
  if (d > 3) throw ConfigError("quadrature checks support dimension <= 3");
  const Window w = quadrature_window(p);
  const double ref = w.reference;

  auto weight = [&](const Vector& x) { return std::exp(ref - p.value(x)); };
  const Eigen::ArrayXd first = quadrature::integrate_box(
      [&](const Vector& x) {
        const double wx = weight(x);
        Eigen::ArrayXd out(2);
        out << wx, f.value(x) * wx;
        return out;
      },
      2, w.knots, options);
  const double z = first[0];
  if (!(z > 0.0) || !std::isfinite(z)) throw QuadratureError("normalising constant is not finite and positive");
  const double mean = first[1] / z;

  const Eigen::ArrayXd second = quadrature::integrate_box(
      [&](const Vector& x) {
        const double wx = weight(x);
        const double dev = f.value(x) - mean;
        const auto form = inverse_hessian_form(p.hessian(x), f.gradient(x));
        if (!form) throw std::domain_error("Hessian is not positive definite at a quadrature node");
        Eigen::ArrayXd out(2);
        out << dev * dev * wx, *form * wx;
        return out;
      },
      2, w.knots, options);

  BlQuadratureResult r;
  r.mean_f = mean;
  r.lhs = second[0] / z;
  r.rhs = second[1] / z;
  r.holds = r.lhs <= r.rhs + 1e-6 * (1.0 + r.rhs);
  return r;
}

BlMonteCarloResult bl_check_montecarlo(const Potential& p, const TestFunction& f, const SampleBatch& batch) {
  const std::size_t n = batch.size();
  if (n < 2) throw std::invalid_argument("Monte Carlo check needs at least two samples");
  const Potential& smooth = p.smooth_part() ? *p.smooth_part() : p;
  std::vector<double> values(n);
  std::vector<double> forms;
  forms.reserve(n);
  std::size_t failures = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vector x = batch.point(i);
    values[i] = f.value(x);
    const auto form = inverse_hessian_form(smooth.hessian(x), f.gradient(x));
    if (form && std::isfinite(*form)) {
      forms.push_back(*form);
    } else {
      ++failures;
    }
  }
  if (static_cast<double>(failures) > 1e-3 * static_cast<double>(n)) {
    std::ostringstream msg;
    msg << "Hessian solve failed at " << failures << " of " << n << " points";
    throw NotExpConcaveAtPoint(msg.str());
  }
  BlMonteCarloResult r;
  r.lhs = variance_jackknife(values);
  r.rhs = mean_estimate(forms);
  r.solve_failures = failures;
  r.violation = r.lhs.value - r.rhs.value > 4.0 * (r.lhs.standard_error + r.rhs.standard_error);
  return r;
}

std::vector<double> counterexample_divergence(double lambda, const std::vector<double>& truncations) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be nonnegative");
  if (truncations.empty()) throw ConfigError("truncations is empty");
  for (std::size_t i = 0; i < truncations.size(); ++i) {
    if (!(truncations[i] > 0.0 && truncations[i] < 1.0)) throw ConfigError("truncations must lie in (0,1)");
    if (i > 0 && !(truncations[i] < truncations[i - 1]))
      throw ConfigError("truncations must be strictly decreasing");
  }
  auto phi = [lambda](double u) { return -2.25 * u + lambda * u * u; };
  std::vector<double> out;
  out.reserve(truncations.size());
  for (double a : truncations) {
    const double upper = -std::log(a);
    // phi is convex, so its maximum on [0, upper] sits at an end
    const double top = std::max(phi(0.0), phi(upper));
    const double integral =
        quadrature::integrate([&](double u) { return std::exp(phi(u) - top); }, 0.0, upper);
    out.push_back(top + std::log(integral));
  }
  return out;
}

std::string counterexample_csv(const std::vector<double>& truncations, const std::vector<double>& log_integrals) {
  std::string out = io::csv_row(std::vector<std::string>{"truncation", "log_integral"});
  for (std::size_t i = 0; i < truncations.size(); ++i) out += io::csv_row({truncations[i], log_integrals[i]});
  return out;
}

std::vector<std::pair<double, double>> subgaussian_mgf_probe(std::span<const double> v, double lambda,
                                                             const std::vector<double>& clips) {
  if (v.empty()) throw std::invalid_argument("probe needs samples");
  for (std::size_t i = 0; i < clips.size(); ++i) {
    if (!(clips[i] >= 0.0)) throw ConfigError("clip levels must be nonnegative");
    if (i > 0 && !(clips[i] > clips[i - 1])) throw ConfigError("clip levels must be increasing");
  }
  const double anchor = v[0];
  std::vector<double> shifted(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) shifted[i] = v[i] - anchor;
  const double mean = compensated_mean(shifted);
  std::vector<std::pair<double, double>> out;
  std::vector<double> terms(v.size());
  for (double clip : clips) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double dev = shifted[i] - mean;
      terms[i] = std::exp(lambda * std::min(dev * dev, clip));
    }
    out.emplace_back(clip, compensated_mean(terms));
  }
  return out;
}

}  // namespace expconc
