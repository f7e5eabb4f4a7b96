#pragma once

#include "expconc/support.hpp"
#include "expconc/types.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace expconc {

/// Independent one-dimensional law of a coordinate under e^{-V}. Used by the
/// exact samplers and for closed-form expectations.
struct CoordinateFactor {
  enum class Law {
    normal,       ///< V_i = rate * x^2 / 2 on R (rate = precision)
    exponential,  ///< V_i = rate * x on [0, inf)
    power,        ///< V_i = -rate * log x on (0, 1); density (rate+1) x^rate
  };
  Law law;
  double rate = 1.0;

  /// E[V_i(X_i)] under the coordinate's own law.
  double mean_potential() const;
};

/// Per-coordinate factorisation; nullopt marks a coordinate the potential
/// does not depend on.
using Factorization = std::vector<std::optional<CoordinateFactor>>;

/// A convex potential V with density e^{-V} on its support. Instances are
/// immutable and cheap to copy; evaluation is reentrant.
class Potential {
 public:
  struct Functions {
    std::function<double(const Vector&)> value;
    std::function<Vector(const Vector&)> gradient;  ///< empty: central differences
    std::function<Matrix(const Vector&)> hessian;   ///< empty: differences of gradient
    std::function<bool(const Vector&)> smooth_at;   ///< empty: smooth everywhere
  };

  Potential(std::string name, SupportSpec support, Functions functions,
            std::optional<double> known_eta = std::nullopt);

  const std::string& name() const { return state_->name; }
  int dimension() const { return state_->support.dimension(); }
  const SupportSpec& support() const { return state_->support; }
  std::optional<double> known_eta() const { return state_->known_eta; }

  /// Throws DomainError outside the support (open ends include the margin).
  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;
  Matrix hessian(const Vector& x) const;
  /// False where the nonsmooth part has a kink at x.
  bool smooth_at(const Vector& x) const;

  bool analytic_gradient() const { return static_cast<bool>(state_->functions.gradient); }
  bool analytic_hessian() const { return static_cast<bool>(state_->functions.hessian); }

  /// Smooth part V1 of V = V1 + V2, when built by add_nonsmooth.
  const Potential* smooth_part() const { return state_->smooth.get(); }
  const Potential* nonsmooth_part() const { return state_->nonsmooth.get(); }

  const std::optional<Factorization>& factorization() const { return state_->factors; }
  /// True when every coordinate has an independent closed-form law.
  bool fully_factorized() const;
  /// Coordinate values where the nonsmooth part may have kinks.
  const std::vector<double>& breakpoints() const { return state_->breakpoints; }

  Potential with_known_eta(std::optional<double> eta) const;
  Potential with_factorization(std::optional<Factorization> factors) const;
  Potential with_breakpoints(std::vector<double> points) const;
  Potential with_parts(Potential smooth, Potential nonsmooth) const;
  Potential renamed(std::string name) const;

  /// Central-difference gradient with step cbrt(eps) * (1 + |x_i|).
  Vector finite_difference_gradient(const Vector& x) const;
  Matrix finite_difference_hessian(const Vector& x) const;

 private:
  struct State {
    std::string name;
    SupportSpec support;
    Functions functions;
    std::optional<double> known_eta;
    std::shared_ptr<const Potential> smooth;
    std::shared_ptr<const Potential> nonsmooth;
    std::optional<Factorization> factors;
    std::vector<double> breakpoints;
  };

  void require_inside(const Vector& x) const;
  Potential modified(const std::function<void(State&)>& edit) const;

  std::shared_ptr<const State> state_;
};

enum class Builtin {
  gaussian,
  exponential,
  neg_log,
  logistic,
  portfolio_log_loss,
  quadratic,
  l1_norm,
  box_indicator,
  zero,
};

/// Parameters for make_builtin; each builtin reads the fields it needs.
struct BuiltinParams {
  std::optional<int> dimension;
  double scale = 1.0;               ///< neg_log: V = -scale * sum log x_i
  std::optional<Matrix> data;       ///< logistic rows a_i; portfolio price relatives
  std::optional<double> eta_radius; ///< logistic: declare eta valid on [-R, R]^d
  std::optional<Matrix> q;          ///< quadratic
  std::optional<Vector> b;          ///< quadratic linear term
  double lo = -1.0;                 ///< box_indicator
  double hi = 1.0;
};

std::optional<Builtin> parse_builtin(std::string_view name);
std::string_view builtin_name(Builtin b);
std::vector<Builtin> all_builtins();

Potential make_builtin(Builtin name, const BuiltinParams& params);
Potential make_builtin(std::string_view name, const BuiltinParams& params);

namespace builtin {
/// V = |x|^2 / 2 on R^d. No global eta on the unbounded support.
Potential gaussian(int d);
/// V = sum x_i on [0, inf)^d; Hessian is zero, so not exp-concave.
Potential exponential(int d);
/// V = -scale * sum log x_i on (0, 1)^d; eta = 1 / (scale * d).
Potential neg_log(int d, double scale = 1.0);
/// V = sum_i log(1 + exp(-<a_i, x>)) over the rows of `a`.
Potential logistic(const Matrix& a, std::optional<double> eta_radius = std::nullopt);
/// Exp-concavity parameter of logistic(a) on [-R, R]^d.
double logistic_eta(const Matrix& a, double radius);
/// V = -sum_i log <a_i, w(x)>, w(x) = (x, 1 - sum x) over the corner simplex.
Potential portfolio_log_loss(const Matrix& price_relatives);
/// V = x'Qx/2 + b'x; Q symmetric PSD.
Potential quadratic(const Matrix& q, const Vector& b);
Potential quadratic(const Matrix& q);
Potential l1_norm(int d);
Potential box_indicator(int d, double lo, double hi);
Potential zero(int d);
}  // namespace builtin

/// Sum of exp-concave parts: eta = (sum 1/eta_i)^{-1}, support = intersection.
Potential compose_sum(const std::vector<std::pair<Potential, double>>& parts);

/// V = base + nonsmooth. Gradient and Hessian come from base alone.
Potential add_nonsmooth(const Potential& base, const Potential& nonsmooth);

/// Embed a one-dimensional potential as V(x) = p(x_coordinate) in R^dimension.
Potential lift_coordinate(const Potential& p, int dimension, int coordinate);

/// c * V for c > 0; eta scales as eta / c.
Potential scaled(const Potential& p, double c);

}  // namespace expconc
