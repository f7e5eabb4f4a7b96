#pragma once

#include "expconc/potential.hpp"
#include "expconc/samplers.hpp"

#include <optional>
#include <vector>

namespace expconc {

/// Empirical exp-concavity certificate over a finite point set. It is a
/// statement about the sampled points only, not a proof.
struct EtaCertificate {
  enum class Mode { certify_declared, estimate };

  struct Violation {
    Vector point;
    /// Minimum eigenvalue of hess V - eta grad V grad V^T at the point.
    double min_eigenvalue;
  };

  Mode mode = Mode::estimate;
  std::optional<double> declared_eta;
  std::vector<Vector> points;
  /// Largest feasible eta per point; +inf where the gradient vanishes.
  std::vector<double> local_eta;
  double global_eta = 0.0;
  std::vector<Violation> violations;

  bool passed() const { return violations.empty(); }
};

/// <H^{-1} g, g> for symmetric PSD H: a Cholesky solve when H is well
/// conditioned, the pseudo-inverse when g lies in its range, nullopt when g
/// has a component in the null space (eigenvalues below 1e-10 lambda_max).
std::optional<double> inverse_hessian_form(const Matrix& h, const Vector& g);

/// 1 / <hess V^{-1} grad V, grad V>, the largest eta the Hessian inequality
/// admits at x. Returns +inf when |grad V| <= 1e-12 (1 + |x|). A singular
/// Hessian is handled by its pseudo-inverse when the gradient lies in its
/// range; otherwise throws NotExpConcaveAtPoint.
double local_eta(const Potential& p, const Vector& x);

/// Estimate mode when `declared_eta` is empty; otherwise also lists points
/// where min eig(hess V - eta g g^T) < -1e-8 (1 + |hess V|).
EtaCertificate certify(const Potential& p, const SampleBatch& points,
                       std::optional<double> declared_eta = std::nullopt);

/// Norm of the projection of grad V(x) onto the null space of hess V(x)
/// (eigenvalues below 1e-10 * lambda_max). Exp-concavity forces this to 0.
double project_gradient_check(const Potential& p, const Vector& x);

/// 1 / <(hess V + eps I)^{-1} grad V, grad V>; nondecreasing in eps.
double regularized_local_eta(const Potential& p, const Vector& x, double eps);

/// Points drawn from e^{-V} plus a Halton grid over the support (a window of
/// half-width 3 around the interior point on unbounded coordinates).
SampleBatch certification_points(const Potential& p, std::size_t n_samples, std::size_t n_grid,
                                 std::uint64_t seed);

/// i-th point (1-based) of the Halton sequence in [0,1)^d.
Vector halton_point(std::size_t index, int d);

}  // namespace expconc
