#pragma once

#include "expconc/concentration.hpp"
#include "expconc/potential.hpp"
#include "expconc/samplers.hpp"
#include "expconc/stats.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace expconc {

/// One round of sampled exponential weights. The prediction is made from the
/// posterior over the losses of rounds 1..t-1 and then charged loss t.
struct OnlineRound {
  std::size_t t = 0;
  /// Index into the loss stream used at this round.
  std::size_t loss_index = 0;
  Vector prediction;
  double loss = 0.0;
  /// Loss of the best fixed point at this round.
  double comparator_loss = 0.0;
  /// Running sum of (loss - comparator_loss), accumulated left to right.
  double regret = 0.0;
  /// |mean of V over the round's samples - long-run estimate of EV|.
  double deviation = 0.0;
};

struct ExpWeightsConfig {
  /// Samples per round.
  std::size_t n_samples = 50;
  std::size_t rounds = 200;
  /// Posterior is proportional to exp(-learning_rate * cumulative loss).
  double learning_rate = 1.0;
  /// Hit-and-run steps discarded each round after the warm start.
  std::size_t burn_in = 100;
  std::size_t thinning = 2;
  /// Length of the separate chain estimating EV for the deviation column.
  std::size_t reference_samples = 400;
};

struct ExpWeightsRun {
  std::vector<OnlineRound> rounds;
  /// Minimiser of the cumulative loss over all rounds.
  Vector comparator;
};

/// Losses are used cyclically: round t charges losses[(t - 1) % size]. All
/// losses share one bounded support, which also carries the uniform prior.
ExpWeightsRun run_exp_weights(const std::vector<Potential>& losses, const ExpWeightsConfig& cfg,
                              std::uint64_t seed);

/// Columns t,loss,regret,deviation.
std::string exp_weights_csv(const std::vector<OnlineRound>& rounds);

/// Cumulative potential of the first `count` losses of the stream, scaled by
/// `weight`, with the support of the stream (zero when count is 0).
Potential cumulative_loss(const std::vector<Potential>& losses, std::size_t count, double weight = 1.0);

struct DeviationFrequency {
  double frequency = 0.0;
  std::size_t exceedances = 0;
  std::size_t reps = 0;
  double bound = 0.0;
  Estimate expected_v;
  bool closed_form_mean = false;
};

/// Frequency of |mean of V over N i.i.d. draws - EV| > t over `reps`
/// replications, beside the i.i.d. Chernoff bound at the declared eta. EV is
/// exact for factorised potentials; otherwise it comes from a pre-pass of
/// `pre_pass` exact draws whose standard error must stay below t/100.
DeviationFrequency deviation_frequency(const Potential& p, std::size_t n, double t, std::size_t reps,
                                       std::uint64_t seed, std::size_t pre_pass = 10'000'000);

struct HpdThresholds {
  /// V(x*) + c1 sqrt(d log(1/alpha)) + d
  double plain = 0.0;
  /// V(x*) + c2 log(1/alpha) sqrt(n/eta) + d
  double exp_concave = 0.0;
};

HpdThresholds hpd_thresholds(double map_value, int d, double n, double eta, double alpha, double c1 = 1.0,
                             double c2 = 1.0);

struct HpdResult {
  double alpha = 0.05;
  double n = 1.0;
  double eta = 1.0;
  double c1 = 1.0;
  double c2 = 1.0;
  /// Empirical (1 - alpha) quantile of V over the batch.
  double gamma = 0.0;
  Vector map_point;
  double map_value = 0.0;
  HpdThresholds thresholds;
  bool contained_plain = false;
  bool contained_exp_concave = false;

  /// "exp_concave", "plain" or "equal", by the smaller threshold.
  std::string tighter() const;
};

/// `p` is the scaled posterior potential V = n L with a uniform prior and
/// `batch` is drawn from e^{-V}. eta is the exp-concavity of L, n times the
/// declared eta of p unless given. Throws std::runtime_error when the
/// minimisation for x* does not converge.
HpdResult hpd_experiment(const Potential& p, double n, double alpha, const SampleBatch& batch, double c1 = 1.0,
                         double c2 = 1.0, std::optional<double> eta = std::nullopt);

struct InformationDensityReport {
  double rho = 0.0;
  int d = 1;
  std::size_t n = 0;
  /// -log f(Y|X) per sample
  std::vector<double> conditional;
  /// log f(X,Y) / (f(X) f(Y)) per sample
  std::vector<double> mutual;
  Estimate conditional_mean;
  Estimate mutual_mean;
  /// h(Y|X) = d/2 log(2 pi e (1 - rho^2))
  double conditional_entropy = 0.0;
  /// I(X;Y) = -d/2 log(1 - rho^2)
  double mutual_information = 0.0;
  /// Worst per-sample |identity residual| / max(1, |-log f(X,Y)|).
  double conditional_identity_error = 0.0;
  double mutual_identity_error = 0.0;
  TailReport conditional_tails;
  TailReport mutual_tails;

  bool identities_hold(double tolerance = 1e-10) const {
    return conditional_identity_error <= tolerance && mutual_identity_error <= tolerance;
  }
};

/// Pairs (X, Y) in R^d x R^d with independent coordinates of correlation rho.
/// Tails of both densities are set against log-concave bounds in dimension d
/// with constants (2 c1, c2 / 2) and (3 c1, c2 / 3).
InformationDensityReport information_density_experiment(double rho, int d, std::size_t n, std::uint64_t seed,
                                                        const std::vector<double>& t_grid, double c1 = 1.0,
                                                        double c2 = 1.0, double confidence = 0.99);

}  // namespace expconc
