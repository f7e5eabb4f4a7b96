#include "expconc/expconcavity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace expconc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNullCutoff = 1e-10;

bool vanishing_gradient(const Vector& g, const Vector& x) {
  return g.norm() <= 1e-12 * (1.0 + x.norm());
}

}  // namespace

std::optional<double> inverse_hessian_form(const Matrix& h, const Vector& g) {
  if (g.norm() == 0.0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
  if (eig.info() != Eigen::Success) return std::nullopt;
  const Vector& lambda = eig.eigenvalues();
  const double lambda_max = lambda.maxCoeff();
  if (!(lambda_max > 0.0)) return std::nullopt;
  const double cutoff = kNullCutoff * lambda_max;
  if (lambda.minCoeff() > cutoff) return g.dot(h.llt().solve(g));
  const Vector coeffs = eig.eigenvectors().transpose() * g;
  double form = 0.0;
  double null_part = 0.0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda[i] > cutoff) {
      form += coeffs[i] * coeffs[i] / lambda[i];
    } else {
      null_part += coeffs[i] * coeffs[i];
    }
  }
  if (std::sqrt(null_part) > 1e-8 * (1.0 + g.norm())) return std::nullopt;
  return form;
}

double local_eta(const Potential& p, const Vector& x) {
  const Vector g = p.gradient(x);
  if (vanishing_gradient(g, x)) return kInf;
  const auto form = inverse_hessian_form(p.hessian(x), g);
  if (!form) throw NotExpConcaveAtPoint("Hessian is singular in the gradient direction");
  if (!(*form > 0.0)) throw NotExpConcaveAtPoint("Hessian solve against the gradient failed");
  return 1.0 / *form;
}

EtaCertificate certify(const Potential& p, const SampleBatch& points,
                       std::optional<double> declared_eta) {
  if (points.size() == 0) throw std::invalid_argument("certification needs at least one point");
  if (declared_eta && !(*declared_eta >= 0.0)) throw ConfigError("declared eta must be nonnegative");
  EtaCertificate cert;
  cert.mode = declared_eta ? EtaCertificate::Mode::certify_declared : EtaCertificate::Mode::estimate;
  cert.declared_eta = declared_eta;
  cert.points.reserve(points.size());
  cert.local_eta.reserve(points.size());
  double finite_min = kInf;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vector x = points.point(i);
    double eta_here = 0.0;
    try {
      eta_here = local_eta(p, x);
    } catch (const NotExpConcaveAtPoint&) {
      eta_here = 0.0;
    }
    cert.points.push_back(x);
    cert.local_eta.push_back(eta_here);
    finite_min = std::min(finite_min, eta_here);

    if (declared_eta) {
      const Matrix h = p.hessian(x);
      const Vector g = p.gradient(x);
      const Matrix m = h - *declared_eta * g * g.transpose();
      Eigen::SelfAdjointEigenSolver<Matrix> eig_m(m, Eigen::EigenvaluesOnly);
      Eigen::SelfAdjointEigenSolver<Matrix> eig_h(h, Eigen::EigenvaluesOnly);
      const double h_norm = eig_h.eigenvalues().cwiseAbs().maxCoeff();
      const double min_eig = eig_m.eigenvalues().minCoeff();
      if (min_eig < -1e-8 * (1.0 + h_norm)) cert.violations.push_back({x, min_eig});
    }
  }
  cert.global_eta = finite_min;
  return cert;
}

double project_gradient_check(const Potential& p, const Vector& x) {
  const Vector g = p.gradient(x);
  const Matrix h = p.hessian(x);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
  if (eig.info() != Eigen::Success) throw std::runtime_error("Hessian eigendecomposition failed");
  const Vector& lambda = eig.eigenvalues();
  const double cutoff = kNullCutoff * std::max(lambda.maxCoeff(), 0.0);
  Vector projection = Vector::Zero(g.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda[i] <= cutoff) {
      const Vector u = eig.eigenvectors().col(i);
      projection += u.dot(g) * u;
    }
  }
  return projection.norm();
}

double regularized_local_eta(const Potential& p, const Vector& x, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("regularisation eps must be positive");
  const Vector g = p.gradient(x);
  if (vanishing_gradient(g, x)) return kInf;
  Matrix h = p.hessian(x);
  h.diagonal().array() += eps;
  const double form = g.dot(h.ldlt().solve(g));
  if (!(form > 0.0)) throw NotExpConcaveAtPoint("regularised Hessian solve failed");
  return 1.0 / form;
}

Vector halton_point(std::size_t index, int d) {
  static constexpr int kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41,
                                    43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97};
  if (d > static_cast<int>(std::size(kPrimes))) throw std::invalid_argument("Halton dimension too large");
  Vector out(d);
  for (int j = 0; j < d; ++j) {
    const int base = kPrimes[j];
    double f = 1.0;
    double r = 0.0;
    for (std::size_t i = index; i > 0; i /= base) {
      f /= base;
      r += f * static_cast<double>(i % base);
    }
    out[j] = r;
  }
  return out;
}

SampleBatch certification_points(const Potential& p, std::size_t n_samples, std::size_t n_grid,
                                 std::uint64_t seed) {
  SampleBatch drawn;
  if (n_samples > 0) {
    if (p.fully_factorized() || p.dimension() == 1) {
      drawn = sample_exact(p, n_samples, seed);
    } else {
      ChainConfig cfg;
      cfg.burn_in = 1000;
      cfg.n_chains = 1;
      const auto method =
          p.support().bounded() ? SamplingMethod::hit_and_run : SamplingMethod::mala;
      drawn = sample_mcmc(p, n_samples, method, cfg, seed);
    }
  }
  const int d = p.dimension();
  const auto& bounds = p.support().box_bounds();
  const Vector center = p.support().interior_point();
  std::vector<Vector> grid;
  for (std::size_t i = 1; grid.size() < n_grid && i < 50 * (n_grid + 1); ++i) {
    const Vector u = halton_point(i, d);
    Vector x(d);
    for (int j = 0; j < d; ++j) {
      double lo = bounds[j].effective_lo();
      double hi = bounds[j].effective_hi();
      if (!std::isfinite(lo)) lo = (std::isfinite(hi) ? std::min(hi, center[j]) : center[j]) - 3.0;
      if (!std::isfinite(hi)) hi = std::max(lo, center[j]) + 3.0;
      if (p.support().has_simplex()) {
        lo = std::max(lo, 0.0);
        hi = std::min(hi, 1.0);
      }
      x[j] = lo + (hi - lo) * u[j];
    }
    if (p.support().contains(x)) grid.push_back(x);
  }
  SampleBatch out;
  out.seed = seed;
  out.method = drawn.method;
  out.diagnostics = drawn.diagnostics;
  out.points.resize(static_cast<Eigen::Index>(drawn.size() + grid.size()), d);
  out.v_values = drawn.v_values;
  for (std::size_t i = 0; i < drawn.size(); ++i) out.points.row(static_cast<Eigen::Index>(i)) = drawn.points.row(static_cast<Eigen::Index>(i));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out.points.row(static_cast<Eigen::Index>(drawn.size() + i)) = grid[i].transpose();
    out.v_values.push_back(p.value(grid[i]));
  }
  return out;
}

}  // namespace expconc
