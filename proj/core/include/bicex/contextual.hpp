#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bicex/bandit.hpp"
#include "bicex/bic.hpp"
#include "bicex/constants.hpp"
#include "bicex/metrics.hpp"
#include "bicex/model.hpp"
#include "bicex/priors.hpp"
#include "bicex/rng.hpp"

namespace bicex {

/// Finite context space with a categorical arrival distribution.
struct ContextSpace {
  std::vector<double> weights;

  int size() const { return static_cast<int>(weights.size()); }
};

/// Auxiliary feedback attached to each observation; noisy_mean draws a
/// Gaussian observation of the played cell's true mean and formats it as a
/// token. The reductions forward tokens untouched.
enum class FeedbackKind { none, noisy_mean };

/// Prior over the mean matrix mu[arm][context]. Independent correlation uses
/// one marginal per cell (arm-major); offset correlation uses one base
/// marginal per context with mu[a][x] = base_x - offsets[a], offsets
/// nonnegative and nondecreasing with offsets[0] = 0.
class ContextualPrior {
 public:
  ContextualPrior(std::vector<ArmMarginal> cells, std::vector<RewardFamily> rewards,
                  ContextSpace contexts, Correlation correlation = Correlation::independent,
                  std::vector<double> offsets = {}, FeedbackKind feedback = FeedbackKind::none,
                  double feedback_noise_var = 0.0);

  int num_arms() const { return num_arms_; }
  int num_contexts() const { return space_.size(); }
  double prior_mean(int arm, int context) const;
  const ArmMarginal& cell(int arm, int context) const;
  const RewardFamily& reward(int arm) const;
  const std::vector<RewardFamily>& rewards() const { return rewards_; }
  const ContextSpace& contexts() const { return space_; }
  Correlation correlation() const { return correlation_; }
  const std::vector<double>& offsets() const { return offsets_; }
  FeedbackKind feedback() const { return feedback_; }
  double feedback_noise_var() const { return feedback_noise_var_; }

  /// Realized mean matrix, arm-major. Consumes one draw per cell
  /// (independent) or per context (offset).
  std::vector<double> sample_matrix(RngStream& rng) const;

  /// Draws a context from D_X; consumes no randomness when |X| = 1.
  int sample_context(RngStream& rng) const;

 private:
  std::vector<ArmMarginal> cells_;
  std::vector<RewardFamily> rewards_;
  ContextSpace space_;
  Correlation correlation_;
  std::vector<double> offsets_;
  FeedbackKind feedback_;
  double feedback_noise_var_;
  int num_arms_;
  std::vector<double> cum_weights_;
};

/// Arms of the given context sorted by prior mean descending, ties by arm
/// index ascending; entry r-1 is the arm of rank r.
std::vector<int> arm_rank(const ContextualPrior& prior, int context);

struct ContextualEnvironment {
  std::vector<double> means;  // arm-major
  std::vector<RewardFamily> rewards;
  int arms = 0;
  int contexts = 0;

  double mean_of(int arm, int context) const {
    return means.at(static_cast<std::size_t>(arm) * static_cast<std::size_t>(contexts) +
                    static_cast<std::size_t>(context));
  }
  double draw(int arm, int context, RngStream& rng) const {
    return draw_reward(rewards.at(static_cast<std::size_t>(arm)), mean_of(arm, context), rng);
  }
};

ContextualEnvironment make_contextual_environment(const ContextualPrior& prior,
                                                  RngStream& instance_rng);

struct ContextualDataset {
  int arms = 0;
  int contexts = 0;
  std::vector<ArmStats> cells;  // arm-major

  ContextualDataset() = default;
  ContextualDataset(int num_arms, int num_contexts)
      : arms(num_arms), contexts(num_contexts),
        cells(static_cast<std::size_t>(num_arms) * static_cast<std::size_t>(num_contexts)) {}
  ArmStats& at(int arm, int context) {
    return cells.at(static_cast<std::size_t>(arm) * static_cast<std::size_t>(contexts) +
                    static_cast<std::size_t>(context));
  }
  const ArmStats& at(int arm, int context) const {
    return cells.at(static_cast<std::size_t>(arm) * static_cast<std::size_t>(contexts) +
                    static_cast<std::size_t>(context));
  }
  void add(int arm, int context, double reward) { at(arm, context).add(reward); }
};

/// Posterior mean of mu[arm][context] given the dataset. Independent cells
/// condition on that cell's samples only; offset priors condition on every
/// arm's samples at the context.
double contextual_posterior_mean(const ContextualPrior& prior, const ContextualDataset& data,
                                 int arm, int context, const PosteriorOptions& opts = {});

/// Exploit arm for one context: argmax of the posterior mean, ties to the
/// lowest arm index.
int contextual_exploit_arm(const ContextualPrior& prior, const ContextualDataset& data,
                           int context, const PosteriorOptions& opts = {});

struct ContextualReductionConfig {
  std::int64_t k = 1;
  std::int64_t L = 1;
  std::int64_t T = 1;
};

struct ContextualReductionRun {
  Transcript transcript;
  ContextualDataset samples;
  std::int64_t sampling_rounds = 0;  // c = mLk + k
  std::vector<int> wrapped_arms;
  std::vector<std::optional<std::string>> phase_predictions;
  std::vector<std::int64_t> dedicated_rounds;
  // One per-context exploit table per phase boundary: sampling phases
  // i = 2..m, the pad block, then every simulation phase.
  std::vector<std::vector<int>> exploit_tables;
};

/// Contextual black-box reduction: k rounds of arm-rank 1, one phase of Lk
/// rounds per rank i = 2..m with a uniform k-subset on rank i, an exploit-only
/// pad block completing the sampling stage at c = mLk + k rounds, then
/// simulation phases of L rounds forwarding one dedicated agent per phase to
/// the wrapped algorithm together with her context, reward, and feedback.
ContextualReductionRun run_contextual_reduction(const ContextualPrior& prior,
                                                const ContextualReductionConfig& cfg,
                                                const ContextualFactory& make_algo,
                                                const ContextualEnvironment& env,
                                                std::uint64_t root_seed, std::uint64_t replicate,
                                                const RunOptions& opts = {});

struct RankPairPersuasion {
  int rank = 0;        // 1-based arm-rank i
  int comparator = 0;  // 1-based arm-rank j, drawn from {i-1, m}
  bool feasible = false;
  double tau_star = 0.0;
  double rho_point = 0.0;
  double rho_lcb = 0.0;
  std::vector<TauGridPoint> curve;
};

struct ContextualPersuasionConstants {
  std::int64_t k_p = 0;
  double tau_p = 0.0;
  double rho_p = 0.0;
  double l_p = 0.0;  // 1 + max prior-mean gap / (tau_p rho_p)
  int replicates = 0;
  double ci_level = 0.0;
  std::vector<RankPairPersuasion> pairs;
};

/// Monte-Carlo exceedance curves for the rank statistics
/// X(i,j,x) = posterior mean of rank i at x minus rank j at x, given k
/// rank-samples of every rank below i, weighted by the context distribution.
/// Ranks i >= 2 must be feasible against both comparators.
ContextualPersuasionConstants estimate_contextual_persuasion(const ContextualPrior& prior,
                                                             std::int64_t k,
                                                             int replicates = 20000,
                                                             double ci_level = 0.95,
                                                             std::uint64_t seed = 2024);

/// Bayesian contextual regret against the best policy in the class, using
/// each transcript's realized mean matrix.
RegretCurve contextual_regret(const std::vector<Transcript>& transcripts,
                              const ContextualPrior& prior, const PolicyClass& policies);

}  // namespace bicex
