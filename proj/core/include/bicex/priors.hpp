#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "bicex/environment.hpp"
#include "bicex/model.hpp"
#include "bicex/rng.hpp"

namespace bicex {

/// Marginal prior over one arm's mean reward.
struct ArmMarginal {
  enum class Kind { gaussian, beta_bernoulli, bounded_grid, point_mass };
  Kind kind = Kind::point_mass;

  double mean = 0.0, variance = 1.0;  // gaussian
  double alpha = 1.0, beta = 1.0;     // beta_bernoulli
  double lo = 0.0, hi = 1.0;          // bounded_grid support
  std::vector<double> weights;        // bounded_grid cell weights; uniform when empty
  int cells = 10000;                  // bounded_grid resolution when weights empty
  double point = 0.0;                 // point_mass

  double prior_mean() const;

  static ArmMarginal gaussian_prior(double mean, double variance);
  static ArmMarginal beta_prior(double alpha, double beta);
  static ArmMarginal grid_prior(double lo, double hi, int cells,
                                std::vector<double> weights = {});
  static ArmMarginal point_prior(double value);
};

enum class Correlation { independent, offset };

/// Joint prior over arm means plus the reward family of each arm.
///
/// Arms must be declared with non-increasing prior means; the constructor
/// rejects anything else. `relabeled` sorts first (stable, so ties keep their
/// input order) and records where each input arm ended up. Under offset
/// correlation a single base marginal drives arm 0 and every other arm's mean
/// is the base minus a fixed offset.
class PriorModel {
 public:
  PriorModel(std::vector<ArmMarginal> arms, std::vector<RewardFamily> rewards,
             Correlation correlation = Correlation::independent,
             std::vector<double> offsets = {});

  static PriorModel relabeled(std::vector<ArmMarginal> arms,
                              std::vector<RewardFamily> rewards);

  int num_arms() const { return num_arms_; }
  double prior_mean(int arm) const;
  const std::vector<RewardFamily>& rewards() const { return rewards_; }
  const RewardFamily& reward(int arm) const {
    return rewards_.at(static_cast<std::size_t>(arm));
  }
  Correlation correlation() const { return correlation_; }
  const std::vector<ArmMarginal>& marginals() const { return arms_; }
  const ArmMarginal& marginal(int arm) const;
  const std::vector<double>& offsets() const { return offsets_; }
  /// Input position of each internal arm after `relabeled`; identity otherwise.
  const std::vector<int>& input_labels() const { return input_labels_; }

  bool deterministic() const;  // every arm's mean is a point mass

 private:
  std::vector<ArmMarginal> arms_;
  std::vector<RewardFamily> rewards_;
  Correlation correlation_;
  std::vector<double> offsets_;
  std::vector<int> input_labels_;
  int num_arms_ = 0;
};

struct PosteriorOptions {
  int importance_draws = 4096;     // correlated priors
  double min_ess = 100.0;          // degeneracy warning threshold
  std::uint64_t sampler_seed = 0x9d2c5680a76b3fULL;
};

struct PosteriorDiag {
  double ess = 0.0;        // effective sample size of the importance weights
  bool degenerate = false; // ess fell below the floor
};

/// Posterior mean of one arm's latent mean given observed rewards. Closed
/// form for conjugate marginals, grid quadrature for bounded-grid priors,
/// self-normalized importance sampling for correlated priors.
double posterior_mean(const PriorModel& prior, const Dataset& data, int arm,
                      const PosteriorOptions& opts = {}, PosteriorDiag* diag = nullptr);

/// Posterior mean of a single marginal given that arm's own observations;
/// the independent-correlation building block of posterior_mean.
double marginal_posterior_mean(const ArmMarginal& marginal, const RewardFamily& family,
                               const ArmStats& stats);

/// One draw of a latent mean from a marginal.
double sample_marginal(const ArmMarginal& marginal, RngStream& rng);

MabInstance sample_instance(const PriorModel& prior, RngStream& rng);

Environment make_environment(const PriorModel& prior, RngStream& instance_rng);

/// Mean and variance of the posterior-mean difference for two-arm independent
/// Gaussian priors after k samples of arm 0: the difference
/// E[mu_1 - mu_0 | k samples of arm 0] is Gaussian with these parameters.
struct XkDistribution {
  double mean = 0.0;
  double variance = 0.0;
};
XkDistribution xk_distribution(const PriorModel& prior, std::int64_t k);

}  // namespace bicex
