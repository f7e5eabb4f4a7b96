#pragma once

#include "expconc/potential.hpp"
#include "expconc/types.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string_view>
#include <vector>

namespace expconc {

enum class SamplingMethod { exact_inverse_cdf, exact_gaussian, exact_exponential, mala, ula, hit_and_run };

std::string_view method_name(SamplingMethod m);
std::optional<SamplingMethod> parse_method(std::string_view name);

struct SamplerDiagnostics {
  double acceptance_rate = 1.0;
  double effective_sample_size = 0.0;
  std::size_t burn_in = 0;
  std::size_t thinning = 1;
  std::size_t n_chains = 1;
  /// Step size after burn-in adaptation (MCMC only).
  double step_size = 0.0;
};

/// Points drawn from e^{-V} with V cached per point. Row i of `points` is sample i.
struct SampleBatch {
  Matrix points;
  std::vector<double> v_values;
  std::uint64_t seed = 0;
  SamplingMethod method = SamplingMethod::exact_inverse_cdf;
  SamplerDiagnostics diagnostics;

  std::size_t size() const { return v_values.size(); }
  int dimension() const { return static_cast<int>(points.cols()); }
  Vector point(std::size_t i) const { return points.row(static_cast<Eigen::Index>(i)).transpose(); }
  std::vector<double> coordinate(int j) const;
};

struct ChainConfig {
  double step_size = 0.5;
  std::size_t burn_in = 10000;
  std::size_t thinning = 1;
  std::size_t n_chains = 4;
  double target_acceptance = 0.574;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// I.i.d. draws for fully factorised potentials (normal, exponential and
/// power coordinates) and for any one-dimensional potential via a tabulated,
/// numerically inverted CDF.
SampleBatch sample_exact(const Potential& p, std::size_t n, std::uint64_t seed);

/// Markov chain sampling after burn-in. `method` is mala, ula or hit_and_run.
/// Chain c uses the random stream (seed, c); chains are concatenated in order.
SampleBatch sample_mcmc(const Potential& p, std::size_t n, SamplingMethod method,
                        const ChainConfig& cfg, std::uint64_t seed,
                        std::optional<Vector> start = std::nullopt);

/// Effective sample size by Geyer's initial positive sequence.
double ess(std::span<const double> sequence);

/// CSV with header x0,...,x{d-1},v.
void write_csv(const SampleBatch& batch, std::ostream& out);

/// CDF of the one-dimensional law e^{-V} by tabulated quadrature.
class TabulatedCdf {
 public:
  explicit TabulatedCdf(const Potential& p);
  double cdf(double x) const;
  double inverse(double u) const;
  double lower() const { return edges_.front(); }
  double upper() const { return edges_.back(); }

 private:
  double density(double x) const;
  double cell_mass(double a, double b) const;

  Potential potential_;
  double reference_ = 0.0;
  std::vector<double> edges_;
  std::vector<double> cumulative_;
};

}  // namespace expconc
