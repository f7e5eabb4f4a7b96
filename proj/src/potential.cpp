#include "expconc/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace expconc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double fd_step(double xi) {
  static const double base = std::cbrt(std::numeric_limits<double>::epsilon());
  return base * (1.0 + std::abs(xi));
}

/// log(1 + e^{-z}) without overflow.
double softplus_neg(double z) { return std::max(-z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

/// 1 / (1 + e^{z}), i.e. sigma(-z).
double sigmoid_neg(double z) {
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

void require_dimension(int d) {
  if (d < 1) throw ConfigError("dimension must be positive");
}

std::optional<Factorization> merge_factors(const std::vector<const Potential*>& parts, int d) {
  Factorization merged(d);
  for (const Potential* p : parts) {
    const auto& f = p->factorization();
    if (!f) return std::nullopt;
    for (int i = 0; i < d; ++i) {
      if (!(*f)[i]) continue;
      if (merged[i]) return std::nullopt;  // overlapping factors are not tracked
      merged[i] = (*f)[i];
    }
  }
  return merged;
}

std::vector<double> merge_breakpoints(const std::vector<const Potential*>& parts) {
  std::vector<double> out;
  for (const Potential* p : parts) {
    out.insert(out.end(), p->breakpoints().begin(), p->breakpoints().end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

double CoordinateFactor::mean_potential() const {
  switch (law) {
    case Law::normal:
      return 0.5;
    case Law::exponential:
      return 1.0;
    case Law::power:
      return rate / (rate + 1.0);
  }
  return 0.0;
}

Potential::Potential(std::string name, SupportSpec support, Functions functions,
                     std::optional<double> known_eta) {
  if (!functions.value) throw ConfigError("potential needs a value function");
  if (known_eta && !(*known_eta >= 0.0)) throw ConfigError("known eta must be nonnegative");
  auto s = std::make_shared<State>(State{std::move(name), std::move(support), std::move(functions),
                                         known_eta, nullptr, nullptr, std::nullopt, {}});
  state_ = std::move(s);
}

void Potential::require_inside(const Vector& x) const {
  if (x.size() != dimension()) {
    std::ostringstream msg;
    msg << name() << ": point has dimension " << x.size() << ", expected " << dimension();
    throw DomainError(msg.str());
  }
  if (!support().contains(x)) throw DomainError(name() + ": point outside support");
}

double Potential::value(const Vector& x) const {
  require_inside(x);
  return state_->functions.value(x);
}

Vector Potential::gradient(const Vector& x) const {
  require_inside(x);
  if (state_->functions.gradient) return state_->functions.gradient(x);
  return finite_difference_gradient(x);
}

Matrix Potential::hessian(const Vector& x) const {
  require_inside(x);
  if (state_->functions.hessian) return state_->functions.hessian(x);
  return finite_difference_hessian(x);
}

bool Potential::smooth_at(const Vector& x) const {
  return !state_->functions.smooth_at || state_->functions.smooth_at(x);
}

bool Potential::fully_factorized() const {
  const auto& f = state_->factors;
  return f && std::all_of(f->begin(), f->end(), [](const auto& c) { return c.has_value(); });
}

Vector Potential::finite_difference_gradient(const Vector& x) const {
  const int d = dimension();
  Vector g(d);
  Vector probe = x;
  for (int i = 0; i < d; ++i) {
    const double h = fd_step(x[i]);
    probe[i] = x[i] + h;
    const double up = value(probe);
    probe[i] = x[i] - h;
    const double down = value(probe);
    probe[i] = x[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

Matrix Potential::finite_difference_hessian(const Vector& x) const {
  const int d = dimension();
  Matrix h(d, d);
  Vector probe = x;
  if (analytic_gradient()) {
    for (int j = 0; j < d; ++j) {
      const double step = fd_step(x[j]);
      probe[j] = x[j] + step;
      const Vector up = gradient(probe);
      probe[j] = x[j] - step;
      const Vector down = gradient(probe);
      probe[j] = x[j];
      h.col(j) = (up - down) / (2.0 * step);
    }
  } else {
    // second differences of values need the larger eps^{1/4} step
    const double base = std::pow(std::numeric_limits<double>::epsilon(), 0.25);
    const double center = value(x);
    for (int i = 0; i < d; ++i) {
      const double hi = base * (1.0 + std::abs(x[i]));
      for (int j = i; j < d; ++j) {
        const double hj = base * (1.0 + std::abs(x[j]));
        if (i == j) {
          probe[i] = x[i] + hi;
          const double up = value(probe);
          probe[i] = x[i] - hi;
          const double down = value(probe);
          probe[i] = x[i];
          h(i, i) = (up - 2.0 * center + down) / (hi * hi);
        } else {
          auto eval = [&](double si, double sj) {
            probe[i] = x[i] + si * hi;
            probe[j] = x[j] + sj * hj;
            const double v = value(probe);
            probe[i] = x[i];
            probe[j] = x[j];
            return v;
          };
          h(i, j) = (eval(1, 1) - eval(1, -1) - eval(-1, 1) + eval(-1, -1)) / (4.0 * hi * hj);
        }
      }
    }
  }
  return 0.5 * (h + h.transpose());
}

Potential Potential::modified(const std::function<void(State&)>& edit) const {
  auto copy = std::make_shared<State>(*state_);
  edit(*copy);
  Potential out = *this;
  out.state_ = std::move(copy);
  return out;
}

Potential Potential::with_known_eta(std::optional<double> eta) const {
  if (eta && !(*eta >= 0.0)) throw ConfigError("known eta must be nonnegative");
  return modified([&](State& s) { s.known_eta = eta; });
}

Potential Potential::with_factorization(std::optional<Factorization> factors) const {
  if (factors && static_cast<int>(factors->size()) != dimension())
    throw ConfigError("factorization size does not match dimension");
  return modified([&](State& s) { s.factors = std::move(factors); });
}

Potential Potential::with_breakpoints(std::vector<double> points) const {
  return modified([&](State& s) { s.breakpoints = std::move(points); });
}

Potential Potential::with_parts(Potential smooth, Potential nonsmooth) const {
  return modified([&](State& s) {
    s.smooth = std::make_shared<const Potential>(std::move(smooth));
    s.nonsmooth = std::make_shared<const Potential>(std::move(nonsmooth));
  });
}

Potential Potential::renamed(std::string name) const {
  return modified([&](State& s) { s.name = std::move(name); });
}

// ---------------------------------------------------------------------------
// builtins

std::optional<Builtin> parse_builtin(std::string_view name) {
  for (Builtin b : all_builtins()) {
    if (builtin_name(b) == name) return b;
  }
  return std::nullopt;
}

std::string_view builtin_name(Builtin b) {
  switch (b) {
    case Builtin::gaussian: return "gaussian";
    case Builtin::exponential: return "exponential";
    case Builtin::neg_log: return "neg_log";
    case Builtin::logistic: return "logistic";
    case Builtin::portfolio_log_loss: return "portfolio_log_loss";
    case Builtin::quadratic: return "quadratic";
    case Builtin::l1_norm: return "l1_norm";
    case Builtin::box_indicator: return "box_indicator";
    case Builtin::zero: return "zero";
  }
  return "";
}

std::vector<Builtin> all_builtins() {
  return {Builtin::gaussian,  Builtin::exponential, Builtin::neg_log,
          Builtin::logistic,  Builtin::portfolio_log_loss, Builtin::quadratic,
          Builtin::l1_norm,   Builtin::box_indicator, Builtin::zero};
}

Potential make_builtin(std::string_view name, const BuiltinParams& params) {
  auto b = parse_builtin(name);
  if (!b) throw ConfigError("unknown builtin potential '" + std::string(name) + "'");
  return make_builtin(*b, params);
}

Potential make_builtin(Builtin name, const BuiltinParams& params) {
  auto need_dimension = [&]() {
    if (!params.dimension) throw ConfigError(std::string(builtin_name(name)) + " needs a dimension");
    return *params.dimension;
  };
  auto check_dimension = [&](Eigen::Index got) {
    if (params.dimension && *params.dimension != got)
      throw ConfigError(std::string(builtin_name(name)) + ": dimension mismatch");
  };
  switch (name) {
    case Builtin::gaussian:
      return builtin::gaussian(need_dimension());
    case Builtin::exponential:
      return builtin::exponential(need_dimension());
    case Builtin::neg_log:
      return builtin::neg_log(need_dimension(), params.scale);
    case Builtin::logistic:
      if (!params.data) throw ConfigError("logistic needs a data matrix");
      check_dimension(params.data->cols());
      return builtin::logistic(*params.data, params.eta_radius);
    case Builtin::portfolio_log_loss:
      if (!params.data) throw ConfigError("portfolio_log_loss needs a data matrix");
      check_dimension(params.data->cols() - 1);
      return builtin::portfolio_log_loss(*params.data);
    case Builtin::quadratic: {
      if (!params.q) throw ConfigError("quadratic needs a matrix q");
      check_dimension(params.q->rows());
      Vector b = params.b ? *params.b : Vector::Zero(params.q->rows());
      return builtin::quadratic(*params.q, b);
    }
    case Builtin::l1_norm:
      return builtin::l1_norm(need_dimension());
    case Builtin::box_indicator:
      return builtin::box_indicator(need_dimension(), params.lo, params.hi);
    case Builtin::zero:
      return builtin::zero(need_dimension());
  }
  throw ConfigError("unknown builtin potential");
}

namespace builtin {

Potential gaussian(int d) {
  require_dimension(d);
  Potential::Functions f;
  f.value = [](const Vector& x) { return 0.5 * x.squaredNorm(); };
  f.gradient = [](const Vector& x) { return Vector(x); };
  f.hessian = [d](const Vector&) { return Matrix(Matrix::Identity(d, d)); };
  return Potential("gaussian", SupportSpec::full(d), std::move(f))
      .with_factorization(Factorization(d, CoordinateFactor{CoordinateFactor::Law::normal, 1.0}));
}

Potential exponential(int d) {
  require_dimension(d);
  Potential::Functions f;
  f.value = [](const Vector& x) { return x.sum(); };
  f.gradient = [d](const Vector&) { return Vector(Vector::Ones(d)); };
  f.hessian = [d](const Vector&) { return Matrix(Matrix::Zero(d, d)); };
  SupportSpec support = SupportSpec::box(std::vector<Interval>(d, Interval{0.0, kInf, false, true}));
  return Potential("exponential", std::move(support), std::move(f), 0.0)
      .with_factorization(
          Factorization(d, CoordinateFactor{CoordinateFactor::Law::exponential, 1.0}));
}

Potential neg_log(int d, double scale) {
  require_dimension(d);
  if (!(scale > 0.0)) throw ConfigError("neg_log scale must be positive");
  Potential::Functions f;
  f.value = [scale](const Vector& x) { return -scale * x.array().log().sum(); };
  f.gradient = [scale](const Vector& x) { return Vector(-scale * x.array().inverse()); };
  f.hessian = [scale](const Vector& x) {
    return Matrix((scale * x.array().square().inverse()).matrix().asDiagonal());
  };
  SupportSpec support = SupportSpec::box(std::vector<Interval>(d, Interval{0.0, 1.0, true, true}));
  return Potential("neg_log", std::move(support), std::move(f), 1.0 / (scale * d))
      .with_factorization(Factorization(d, CoordinateFactor{CoordinateFactor::Law::power, scale}));
}

double logistic_eta(const Matrix& a, double radius) {
  if (!(radius > 0.0)) throw ConfigError("logistic eta radius must be positive");
  // one term is e^{z}-exp-concave at z = <a,x>; z >= -R |a|_1 on the box
  double inverse = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    inverse += std::exp(radius * a.row(i).lpNorm<1>());
  }
  return 1.0 / inverse;
}

Potential logistic(const Matrix& a, std::optional<double> eta_radius) {
  if (a.rows() < 1 || a.cols() < 1) throw ConfigError("logistic data matrix is empty");
  const int d = static_cast<int>(a.cols());
  Potential::Functions f;
  f.value = [a](const Vector& x) {
    const Vector z = a * x;
    double v = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) v += softplus_neg(z[i]);
    return v;
  };
  f.gradient = [a](const Vector& x) {
    const Vector z = a * x;
    Vector w(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) w[i] = -sigmoid_neg(z[i]);
    return Vector(a.transpose() * w);
  };
  f.hessian = [a](const Vector& x) {
    const Vector z = a * x;
    Vector w(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      const double s = sigmoid_neg(z[i]);
      w[i] = s * (1.0 - s);
    }
    return Matrix(a.transpose() * w.asDiagonal() * a);
  };
  std::optional<double> eta;
  if (eta_radius) eta = logistic_eta(a, *eta_radius);
  return Potential("logistic", SupportSpec::full(d), std::move(f), eta)
      .with_factorization(std::nullopt);
}

Potential portfolio_log_loss(const Matrix& price_relatives) {
  const Eigen::Index m = price_relatives.rows();
  const Eigen::Index assets = price_relatives.cols();
  if (m < 1 || assets < 2) throw ConfigError("portfolio_log_loss needs >= 1 row and >= 2 assets");
  if ((price_relatives.array() <= 0.0).any())
    throw ConfigError("portfolio price relatives must be positive");
  const int k = static_cast<int>(assets - 1);
  // <a_i, w(x)> = c_i + <b_i, x>
  Matrix b = price_relatives.leftCols(k).colwise() - price_relatives.col(k);
  Vector c = price_relatives.col(k);
  Potential::Functions f;
  f.value = [b, c](const Vector& x) { return -(c + b * x).array().log().sum(); };
  f.gradient = [b, c](const Vector& x) {
    const Vector r = c + b * x;
    return Vector(-b.transpose() * r.cwiseInverse());
  };
  f.hessian = [b, c](const Vector& x) {
    const Vector r = c + b * x;
    return Matrix(b.transpose() * r.array().square().inverse().matrix().asDiagonal() * b);
  };
  return Potential("portfolio_log_loss", SupportSpec::simplex(k), std::move(f),
                   1.0 / static_cast<double>(m));
}

Potential quadratic(const Matrix& q, const Vector& b) {
  if (q.rows() != q.cols() || q.rows() < 1) throw ConfigError("quadratic: q must be square");
  if (b.size() != q.rows()) throw ConfigError("quadratic: dimension mismatch between q and b");
  const double scale = std::max(1.0, q.cwiseAbs().maxCoeff());
  if (!q.isApprox(q.transpose(), 1e-12) && (q - q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw ConfigError("quadratic: q must be symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(q);
  if (eig.eigenvalues().minCoeff() < -1e-10 * scale) throw ConfigError("quadratic: q is not PSD");
  const int d = static_cast<int>(q.rows());
  const Matrix sym = 0.5 * (q + q.transpose());
  Potential::Functions f;
  f.value = [sym, b](const Vector& x) { return 0.5 * x.dot(sym * x) + b.dot(x); };
  f.gradient = [sym, b](const Vector& x) { return Vector(sym * x + b); };
  f.hessian = [sym](const Vector&) { return sym; };
  return Potential("quadratic", SupportSpec::full(d), std::move(f));
}

Potential quadratic(const Matrix& q) { return quadratic(q, Vector::Zero(q.rows())); }

Potential l1_norm(int d) {
  require_dimension(d);
  Potential::Functions f;
  f.value = [](const Vector& x) { return x.lpNorm<1>(); };
  f.gradient = [](const Vector& x) {
    return Vector(x.unaryExpr([](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }));
  };
  f.hessian = [d](const Vector&) { return Matrix(Matrix::Zero(d, d)); };
  f.smooth_at = [](const Vector& x) { return (x.array() != 0.0).all(); };
  return Potential("l1_norm", SupportSpec::full(d), std::move(f)).with_breakpoints({0.0});
}

Potential box_indicator(int d, double lo, double hi) {
  require_dimension(d);
  Potential::Functions f;
  f.value = [](const Vector&) { return 0.0; };
  f.gradient = [d](const Vector&) { return Vector(Vector::Zero(d)); };
  f.hessian = [d](const Vector&) { return Matrix(Matrix::Zero(d, d)); };
  return Potential("box_indicator", SupportSpec::closed_box(d, lo, hi), std::move(f))
      .with_breakpoints({lo, hi});
}

Potential zero(int d) {
  require_dimension(d);
  Potential::Functions f;
  f.value = [](const Vector&) { return 0.0; };
  f.gradient = [d](const Vector&) { return Vector(Vector::Zero(d)); };
  f.hessian = [d](const Vector&) { return Matrix(Matrix::Zero(d, d)); };
  return Potential("zero", SupportSpec::full(d), std::move(f))
      .with_factorization(Factorization(d));
}

}  // namespace builtin

// ---------------------------------------------------------------------------
// combinators

Potential compose_sum(const std::vector<std::pair<Potential, double>>& parts) {
  if (parts.empty()) throw ConfigError("compose_sum needs at least one part");
  const int d = parts.front().first.dimension();
  SupportSpec support = parts.front().first.support();
  double inverse_eta = 0.0;
  std::vector<const Potential*> members;
  std::vector<Potential> potentials;
  std::string name = "sum(";
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto& [p, eta] = parts[i];
    if (p.dimension() != d) throw ConfigError("compose_sum: dimension mismatch");
    if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("compose_sum: each eta must be positive");
    if (i > 0) support = support.intersect(p.support());
    inverse_eta += 1.0 / eta;
    potentials.push_back(p);
    name += (i > 0 ? "+" : "") + p.name();
  }
  name += ")";
  for (const auto& p : potentials) members.push_back(&p);

  Potential::Functions f;
  f.value = [potentials](const Vector& x) {
    double v = 0.0;
    for (const auto& p : potentials) v += p.value(x);
    return v;
  };
  f.gradient = [potentials](const Vector& x) {
    Vector g = potentials.front().gradient(x);
    for (std::size_t i = 1; i < potentials.size(); ++i) g += potentials[i].gradient(x);
    return g;
  };
  f.hessian = [potentials](const Vector& x) {
    Matrix h = potentials.front().hessian(x);
    for (std::size_t i = 1; i < potentials.size(); ++i) h += potentials[i].hessian(x);
    return h;
  };
  f.smooth_at = [potentials](const Vector& x) {
    return std::all_of(potentials.begin(), potentials.end(),
                       [&](const Potential& p) { return p.smooth_at(x); });
  };
  return Potential(name, std::move(support), std::move(f), 1.0 / inverse_eta)
      .with_factorization(merge_factors(members, d))
      .with_breakpoints(merge_breakpoints(members));
}

Potential add_nonsmooth(const Potential& base, const Potential& nonsmooth) {
  if (base.dimension() != nonsmooth.dimension())
    throw ConfigError("add_nonsmooth: dimension mismatch");
  SupportSpec support = base.support().intersect(nonsmooth.support());
  Potential::Functions f;
  f.value = [base, nonsmooth](const Vector& x) { return base.value(x) + nonsmooth.value(x); };
  f.gradient = [base](const Vector& x) { return base.gradient(x); };
  f.hessian = [base](const Vector& x) { return base.hessian(x); };
  f.smooth_at = [nonsmooth](const Vector& x) { return nonsmooth.smooth_at(x); };
  const int d = base.dimension();
  return Potential(base.name() + "+" + nonsmooth.name(), std::move(support), std::move(f),
                   base.known_eta())
      .with_factorization(merge_factors({&base, &nonsmooth}, d))
      .with_breakpoints(merge_breakpoints({&base, &nonsmooth}))
      .with_parts(base, nonsmooth);
}

Potential lift_coordinate(const Potential& p, int dimension, int coordinate) {
  if (p.dimension() != 1) throw ConfigError("lift_coordinate needs a one-dimensional potential");
  if (coordinate < 0 || coordinate >= dimension) throw ConfigError("lift_coordinate: bad coordinate");
  const SupportSpec& s = p.support();
  if (s.kind() != SupportSpec::Kind::full && s.kind() != SupportSpec::Kind::box)
    throw ConfigError("lift_coordinate needs an interval support");
  std::vector<Interval> bounds(dimension, Interval{});
  bounds[coordinate] = s.box_bounds()[0];
  const int i = coordinate;
  const int d = dimension;
  Potential::Functions f;
  f.value = [p, i](const Vector& x) { return p.value(Vector::Constant(1, x[i])); };
  f.gradient = [p, i, d](const Vector& x) {
    Vector g = Vector::Zero(d);
    g[i] = p.gradient(Vector::Constant(1, x[i]))[0];
    return g;
  };
  f.hessian = [p, i, d](const Vector& x) {
    Matrix h = Matrix::Zero(d, d);
    h(i, i) = p.hessian(Vector::Constant(1, x[i]))(0, 0);
    return h;
  };
  f.smooth_at = [p, i](const Vector& x) { return p.smooth_at(Vector::Constant(1, x[i])); };
  std::optional<Factorization> factors;
  if (p.factorization()) {
    factors = Factorization(d);
    (*factors)[i] = (*p.factorization())[0];
  }
  return Potential(p.name() + "[x" + std::to_string(i) + "]", SupportSpec::box(std::move(bounds)),
                   std::move(f), p.known_eta())
      .with_factorization(std::move(factors))
      .with_breakpoints(p.breakpoints());
}

Potential scaled(const Potential& p, double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("scale factor must be positive");
  Potential::Functions f;
  f.value = [p, c](const Vector& x) { return c * p.value(x); };
  f.gradient = [p, c](const Vector& x) { return Vector(c * p.gradient(x)); };
  f.hessian = [p, c](const Vector& x) { return Matrix(c * p.hessian(x)); };
  f.smooth_at = [p](const Vector& x) { return p.smooth_at(x); };
  std::optional<double> eta;
  if (p.known_eta()) eta = *p.known_eta() / c;
  std::optional<Factorization> factors = p.factorization();
  if (factors) {
    for (auto& factor : *factors) {
      if (factor) factor->rate *= c;
    }
  }
  std::ostringstream name;
  name << c << "*" << p.name();
  return Potential(name.str(), p.support(), std::move(f), eta)
      .with_factorization(std::move(factors))
      .with_breakpoints(p.breakpoints());
}

}  // namespace expconc
