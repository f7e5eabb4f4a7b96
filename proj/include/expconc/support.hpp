#pragma once

#include "expconc/types.hpp"

#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace expconc {

/// One coordinate of a box. Open ends are shrunk by kDomainMargin.
struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool lo_open = true;
  bool hi_open = true;

  double effective_lo() const { return lo_open ? lo + kDomainMargin : lo; }
  double effective_hi() const { return hi_open ? hi - kDomainMargin : hi; }
  bool finite() const { return std::isfinite(lo) && std::isfinite(hi); }
};

using MembershipPredicate = std::function<bool(const Vector&)>;

/// Convex support of a potential: an intersection of a coordinate box, an
/// optional corner simplex {x >= 0, sum(x) <= 1}, and membership predicates.
class SupportSpec {
 public:
  enum class Kind { full, box, simplex, convex };

  static SupportSpec full(int dimension);
  static SupportSpec box(std::vector<Interval> bounds);
  static SupportSpec closed_box(int dimension, double lo, double hi);
  static SupportSpec simplex(int dimension);
  /// `radius` bounds the set: every member lies within `radius` of `interior`.
  static SupportSpec convex(int dimension, MembershipPredicate member,
                            Vector interior, double radius);

  int dimension() const { return static_cast<int>(box_.size()); }
  Kind kind() const;
  bool bounded() const;
  bool contains(const Vector& x) const;
  const Vector& interior_point() const { return interior_; }
  const std::vector<Interval>& box_bounds() const { return box_; }
  bool has_simplex() const { return simplex_; }

  /// Parameter range [t_lo, t_hi] with x + t*dir inside the support. `x` must be inside.
  std::pair<double, double> chord(const Vector& x, const Vector& dir) const;

  /// Throws ConfigError when the intersection has no interior point.
  SupportSpec intersect(const SupportSpec& other) const;

  /// Euclidean projection; supported for box-only and simplex-only sets.
  Vector project(const Vector& x) const;

  std::string describe() const;

 private:
  struct Predicate {
    MembershipPredicate member;
    Vector interior;
    double radius;
  };

  SupportSpec() = default;
  void locate_interior();

  std::vector<Interval> box_;
  bool simplex_ = false;
  std::vector<Predicate> predicates_;
  Vector interior_;
};

/// Euclidean projection onto the probability simplex {x >= 0, sum(x) = 1}.
Vector project_probability_simplex(const Vector& x);

}  // namespace expconc
