#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace expconc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Interior margin for open bounds (e.g. the (0,1) support of -log x).
inline constexpr double kDomainMargin = 1e-12;

/// Raised when a point is evaluated outside a potential's support.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed construction parameters (unknown builtin, non-PSD matrix, ...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Hessian cannot be solved against the gradient at a point.
class NotExpConcaveAtPoint : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Markov chain produced a non-finite potential value.
class SamplerDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Step-size adaptation ended with an unusable acceptance rate.
class TuningFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace expconc
