#include "expconc/support.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace expconc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_dimension(int dimension) {
  if (dimension < 1) throw ConfigError("support dimension must be positive");
}

}  // namespace

SupportSpec SupportSpec::full(int dimension) {
  check_dimension(dimension);
  SupportSpec s;
  s.box_.assign(dimension, Interval{});
  s.interior_ = Vector::Zero(dimension);
  return s;
}

SupportSpec SupportSpec::box(std::vector<Interval> bounds) {
  check_dimension(static_cast<int>(bounds.size()));
  for (const auto& b : bounds) {
    if (!(b.effective_lo() < b.effective_hi()))
      throw ConfigError("box bounds must satisfy lo < hi");
  }
  SupportSpec s;
  s.box_ = std::move(bounds);
  s.locate_interior();
  return s;
}

SupportSpec SupportSpec::closed_box(int dimension, double lo, double hi) {
  check_dimension(dimension);
  return box(std::vector<Interval>(dimension, Interval{lo, hi, false, false}));
}

SupportSpec SupportSpec::simplex(int dimension) {
  check_dimension(dimension);
  SupportSpec s;
  s.box_.assign(dimension, Interval{});
  s.simplex_ = true;
  s.interior_ = Vector::Constant(dimension, 1.0 / (dimension + 1));
  return s;
}

SupportSpec SupportSpec::convex(int dimension, MembershipPredicate member, Vector interior,
                                double radius) {
  check_dimension(dimension);
  if (interior.size() != dimension) throw ConfigError("interior point has wrong dimension");
  if (!member(interior)) throw ConfigError("interior point does not satisfy membership");
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw ConfigError("convex support needs a finite positive bounding radius");
  SupportSpec s;
  s.box_.assign(dimension, Interval{});
  s.predicates_.push_back({std::move(member), interior, radius});
  s.interior_ = std::move(interior);
  return s;
}

SupportSpec::Kind SupportSpec::kind() const {
  bool any_box = std::any_of(box_.begin(), box_.end(), [](const Interval& b) {
    return std::isfinite(b.lo) || std::isfinite(b.hi);
  });
  if (!predicates_.empty() || (simplex_ && any_box)) return Kind::convex;
  if (simplex_) return Kind::simplex;
  return any_box ? Kind::box : Kind::full;
}

bool SupportSpec::bounded() const {
  if (simplex_ || !predicates_.empty()) return true;
  return std::all_of(box_.begin(), box_.end(), [](const Interval& b) { return b.finite(); });
}

bool SupportSpec::contains(const Vector& x) const {
  if (x.size() != dimension()) return false;
  for (int i = 0; i < dimension(); ++i) {
    if (!std::isfinite(x[i])) return false;
    if (x[i] < box_[i].effective_lo() || x[i] > box_[i].effective_hi()) return false;
  }
  if (simplex_) {
    if ((x.array() < 0.0).any() || x.sum() > 1.0) return false;
  }
  for (const auto& p : predicates_) {
    if (!p.member(x)) return false;
  }
  return true;
}

std::pair<double, double> SupportSpec::chord(const Vector& x, const Vector& dir) const {
  double t_lo = -kInf;
  double t_hi = kInf;
  auto clip = [&](double offset, double slope) {
    // constraint: offset + t * slope >= 0
    if (slope > 0.0) {
      t_lo = std::max(t_lo, -offset / slope);
    } else if (slope < 0.0) {
      t_hi = std::min(t_hi, -offset / slope);
    }
  };
  for (int i = 0; i < dimension(); ++i) {
    const double lo = box_[i].effective_lo();
    const double hi = box_[i].effective_hi();
    if (std::isfinite(lo)) clip(x[i] - lo, dir[i]);
    if (std::isfinite(hi)) clip(hi - x[i], -dir[i]);
  }
  if (simplex_) {
    for (int i = 0; i < dimension(); ++i) clip(x[i], dir[i]);
    clip(1.0 - x.sum(), -dir.sum());
  }
  for (const auto& p : predicates_) {
    const double reach = (x - p.interior).norm() + p.radius;
    const double unit = dir.norm();
    // bisection keeps the inside end of each bracket
    auto boundary = [&](double sign) {
      double inside = 0.0;
      double outside = sign * reach / unit;
      for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (inside + outside);
        if (p.member(x + mid * dir)) {
          inside = mid;
        } else {
          outside = mid;
        }
      }
      return inside;
    };
    t_lo = std::max(t_lo, boundary(-1.0));
    t_hi = std::min(t_hi, boundary(1.0));
  }
  // pull the ends inward until they survive rounding
  auto settle = [&](double t) {
    if (!std::isfinite(t)) return t;
    double nudge = 1e-15 * (1.0 + std::abs(t));
    for (int it = 0; it < 60 && !contains(x + t * dir); ++it) {
      t = t > 0.0 ? std::max(0.0, t - nudge) : std::min(0.0, t + nudge);
      nudge *= 2.0;
    }
    return t;
  };
  t_lo = settle(t_lo);
  t_hi = settle(t_hi);
  return {std::min(t_lo, 0.0), std::max(t_hi, 0.0)};
}

SupportSpec SupportSpec::intersect(const SupportSpec& other) const {
  if (other.dimension() != dimension()) throw ConfigError("support dimension mismatch");
  SupportSpec s;
  s.box_.resize(box_.size());
  for (std::size_t i = 0; i < box_.size(); ++i) {
    const Interval& a = box_[i];
    const Interval& b = other.box_[i];
    Interval c;
    if (a.lo > b.lo) {
      c.lo = a.lo, c.lo_open = a.lo_open;
    } else if (b.lo > a.lo) {
      c.lo = b.lo, c.lo_open = b.lo_open;
    } else {
      c.lo = a.lo, c.lo_open = a.lo_open || b.lo_open;
    }
    if (a.hi < b.hi) {
      c.hi = a.hi, c.hi_open = a.hi_open;
    } else if (b.hi < a.hi) {
      c.hi = b.hi, c.hi_open = b.hi_open;
    } else {
      c.hi = a.hi, c.hi_open = a.hi_open || b.hi_open;
    }
    if (!(c.effective_lo() < c.effective_hi())) throw ConfigError("empty support intersection");
    s.box_[i] = c;
  }
  s.simplex_ = simplex_ || other.simplex_;
  s.predicates_ = predicates_;
  s.predicates_.insert(s.predicates_.end(), other.predicates_.begin(), other.predicates_.end());

  std::vector<Vector> candidates{interior_, other.interior_, 0.5 * (interior_ + other.interior_)};
  for (const auto& p : s.predicates_) candidates.push_back(p.interior);
  s.interior_ = Vector();
  for (const auto& c : candidates) {
    if (s.contains(c)) {
      s.interior_ = c;
      break;
    }
  }
  if (s.interior_.size() == 0) {
    s.locate_interior();
    if (!s.contains(s.interior_)) throw ConfigError("empty support intersection");
  }
  return s;
}

void SupportSpec::locate_interior() {
  const int d = dimension();
  interior_.resize(d);
  for (int i = 0; i < d; ++i) {
    const Interval& b = box_[i];
    if (b.finite()) {
      interior_[i] = 0.5 * (b.lo + b.hi);
    } else if (std::isfinite(b.lo)) {
      interior_[i] = std::max(b.lo + 1.0, 0.0);
    } else if (std::isfinite(b.hi)) {
      interior_[i] = std::min(b.hi - 1.0, 0.0);
    } else {
      interior_[i] = 0.0;
    }
  }
  if (simplex_ && !contains(interior_)) {
    // shrink the box centre toward the simplex barycentre
    const Vector bary = Vector::Constant(d, 1.0 / (d + 1));
    for (double w = 0.5; w > 1e-6; w *= 0.5) {
      Vector c = w * interior_ + (1.0 - w) * bary;
      if (contains(c)) {
        interior_ = c;
        return;
      }
    }
    interior_ = bary;
  }
}

Vector SupportSpec::project(const Vector& x) const {
  if (!predicates_.empty()) throw ConfigError("projection onto predicate supports is unsupported");
  const Kind k = kind();
  if (k == Kind::convex) throw ConfigError("projection onto box-simplex intersections is unsupported");
  Vector y = x;
  if (k == Kind::simplex) {
    Vector clipped = y.cwiseMax(0.0);
    if (clipped.sum() <= 1.0) return clipped;
    return project_probability_simplex(y);
  }
  for (int i = 0; i < dimension(); ++i) {
    y[i] = std::clamp(y[i], box_[i].effective_lo(), box_[i].effective_hi());
  }
  return y;
}

std::string SupportSpec::describe() const {
  std::ostringstream out;
  switch (kind()) {
    case Kind::full:
      out << "R^" << dimension();
      break;
    case Kind::simplex:
      out << "simplex{x>=0, sum<=1} in R^" << dimension();
      break;
    case Kind::box:
    case Kind::convex: {
      out << "box";
      for (const auto& b : box_) {
        out << (b.lo_open ? '(' : '[') << b.lo << ',' << b.hi << (b.hi_open ? ')' : ']');
      }
      if (simplex_) out << " & simplex";
      if (!predicates_.empty()) out << " & " << predicates_.size() << " predicate(s)";
      break;
    }
  }
  return out.str();
}

Vector project_probability_simplex(const Vector& x) {
  const Eigen::Index n = x.size();
  std::vector<double> u(x.data(), x.data() + n);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    cumulative += u[j];
    const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (u[j] - candidate > 0.0) theta = candidate;
  }
  return (x.array() - theta).cwiseMax(0.0).matrix();
}

}  // namespace expconc
