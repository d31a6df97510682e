#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "bicex/priors.hpp"

namespace bicex {

/// Thrown when a prior cannot support incentive-compatible exploration: the
/// exceedance probabilities behind the persuasion constants are zero (or
/// indistinguishable from zero at the requested replicate budget), or a
/// threshold formula's denominator vanishes.
class PriorNotPersuadable : public std::runtime_error {
 public:
  explicit PriorNotPersuadable(const std::string& what) : std::runtime_error(what) {}
};

/// Log-spaced threshold grid shared by every exceedance-curve estimator.
inline constexpr int kTauGridSize = 50;
std::vector<double> tau_grid();

struct TauGridPoint {
  double tau = 0.0;
  double rho_hat = 0.0;
  double rho_lcb = 0.0;
  double rho_ucb = 0.0;
};

struct ArmPersuasion {
  int arm = 0;  // zero-based
  bool feasible = false;
  double tau_star = 0.0;
  double rho_point = 0.0;
  double rho_lcb = 0.0;
  std::vector<TauGridPoint> curve;
};

struct PersuasionConstants {
  std::int64_t k_p = 1;
  double tau_p = 0.0;
  double rho_p = 0.0;
  int replicates = 0;
  double ci_level = 0.0;
  std::vector<ArmPersuasion> per_arm;
};

struct IntervalEstimate {
  double point = 0.0;
  double lcb = 0.0;
  double ucb = 0.0;
};

/// Monte-Carlo estimate of the persuasion constants at exploration depth k.
/// For each arm i the statistic is X_i = min over other arms j of the
/// posterior-mean difference E[mu_i - mu_j | samples of arms before i].
/// Arm 1's row is informational; arms 2..m gate the result and the returned
/// (tau_p, rho_p) is the arm-wise minimum over their best grid points, where
/// best maximizes tau times the lower confidence bound of the exceedance
/// probability.
PersuasionConstants estimate_persuasion_constants(const PriorModel& prior, std::int64_t k,
                                                  int replicates = 20000,
                                                  double ci_level = 0.95,
                                                  std::uint64_t seed = 2024);

/// E[max_i mu_i] under the prior. Deterministic priors are evaluated exactly.
IntervalEstimate expected_max_mean(const PriorModel& prior, int replicates = 200000,
                                   double ci_level = 0.95, std::uint64_t seed = 2024);

/// E[Y * 1{Y > 0}] for Y = posterior-mean difference of arm 2 over arm 1
/// after k_p samples of arm 1. Exact for the Gaussian-conjugate case.
IntervalEstimate exploration_gain_two_arm(const PriorModel& prior, std::int64_t k_p,
                                          int replicates = 200000, double ci_level = 0.95,
                                          std::uint64_t seed = 2024);

/// Smallest phase length making the two-arm sampler incentive compatible:
/// ceil(max(k_p, 1 + (mu_1^0 - mu_2^0) / E[Y * 1{Y > 0}])). Monte-Carlo
/// estimates use the lower confidence bound of the denominator.
std::int64_t min_phase_length_two_arm(const PriorModel& prior, std::int64_t k_p,
                                      int replicates = 200000, double ci_level = 0.95,
                                      std::uint64_t seed = 2024);

/// Smallest phase length for the simulation stage of the reduction:
/// ceil(2 + (E[max_i mu_i] - mu_m^0) / (tau_p * rho_p)), with the expected
/// maximum taken at its upper confidence bound.
std::int64_t min_phase_length_m_arm(const PriorModel& prior,
                                    const PersuasionConstants& constants,
                                    int replicates = 200000, double ci_level = 0.95,
                                    std::uint64_t seed = 2024);

struct DetailFreeInputs {
  int m = 2;
  double mu_m0 = 0.0;      // prior mean of the worst arm
  double mean_gap = 0.0;   // mu_1^0 - mu_m^0
  double lambda = 0.5;     // C = lambda * mu_m0
  double prior_cdf_point = 0.0;  // probability of the persuasion event
  std::int64_t T = 1;
  double tau = 0.0;              // racing margin
  double racing_min_prob = 0.0;  // min_i Pr[mu_i - max_{j != i} mu_j >= tau]
};

struct DetailFreeThresholds {
  double C = 0.0;
  std::int64_t k = 0;
  std::int64_t L = 0;
  double theta = 0.0;
  std::int64_t k_race = 0;
  std::int64_t n_p = 0;  // max of the thresholds
};

DetailFreeThresholds detail_free_thresholds(const DetailFreeInputs& in);

/// ceil(-log(kappa * (1 - zeta) * C * tail_prob) / (2 * zeta^2 * C^2)).
std::int64_t chernoff_required_k(double C, double zeta, double kappa, double tail_prob);

/// 2 * exp(-2 * n * delta^2).
double hoeffding_tail(std::int64_t n, double delta);

/// Pr[mu_1 <= mu_2^0 * (1 - 3 * lambda / 2)] for two-arm detail-free blocks.
IntervalEstimate two_arm_event_probability(const PriorModel& prior, double lambda,
                                           int replicates = 200000, double ci_level = 0.95,
                                           std::uint64_t seed = 2024);

/// Pr[for every middle arm j: mu_1 + 3C/2 <= mu_j <= mu_m^0 - 3C/2].
IntervalEstimate m_arm_event_probability(const PriorModel& prior, double C,
                                         int replicates = 200000, double ci_level = 0.95,
                                         std::uint64_t seed = 2024);

/// min_i Pr[mu_i - max_{j != i} mu_j >= tau]; bounds are the minima of the
/// per-arm Wilson bounds.
IntervalEstimate racing_min_probability(const PriorModel& prior, double tau,
                                        int replicates = 200000, double ci_level = 0.95,
                                        std::uint64_t seed = 2024);

}  // namespace bicex
