#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "bicex/bandit.hpp"
#include "bicex/environment.hpp"
#include "bicex/model.hpp"
#include "bicex/rng.hpp"

namespace bicex {

/// Index rule: play each arm once, then maximize mean + sqrt(2 ln t / n_i);
/// ties go to the lowest arm index.
std::unique_ptr<BanditAlgorithm> make_ucb1(int num_arms);

/// Per-round successive elimination with threshold c_n = sqrt(ln(T*theta)/n),
/// the non-incentive-aware ancestor of the racing stage. `initial` warm-starts
/// the per-arm statistics (pass an empty Dataset for a cold start).
std::unique_ptr<BanditAlgorithm> make_active_arms_elimination(int num_arms, std::int64_t T,
                                                              double theta,
                                                              const Dataset& initial = Dataset());

/// Round-robin for k_explore rounds per arm, then commit to the empirical
/// best (ties to the lowest index).
std::unique_ptr<BanditAlgorithm> make_explore_then_commit(int num_arms, std::int64_t k_explore);

/// Plays the arm with the best score, where unseen arms score their prior
/// mean and seen arms their empirical mean.
std::unique_ptr<BanditAlgorithm> make_greedy(std::vector<double> prior_means);

std::unique_ptr<BanditAlgorithm> make_constant(int num_arms, int arm);

/// Epsilon-greedy over a finite policy class: with probability epsilon play a
/// uniform arm, otherwise follow the empirically best policy; predict()
/// returns the empirically best policy's token.
std::unique_ptr<ContextualBanditAlgorithm> epsilon_greedy_policies(PolicyClass policies,
                                                                   double epsilon,
                                                                   int num_arms,
                                                                   RngStream rng);

struct BanditSetup {
  int num_arms = 2;
  std::int64_t horizon = 0;
  double theta = 1.0;                // active arms elimination
  std::vector<double> prior_means;   // greedy
  std::int64_t k_explore = 1;        // explore_then_commit
  int constant_arm = 0;              // constant (0-based)
};

/// Registry used by the CLI: "ucb1", "aae", "greedy", "etc", "constant".
/// "etc:<k>" and "constant:<arm>" (1-based arm) carry their parameter inline.
std::unique_ptr<BanditAlgorithm> make_bandit(const std::string& name, const BanditSetup& setup);

std::vector<std::string> bandit_names();

struct StandaloneRun {
  std::vector<int> arms;                                   // per round, 0-based
  std::vector<double> rewards;                             // per round
  std::vector<std::optional<std::string>> predictions;     // per round, post-update
  Transcript transcript;                                   // same rounds, role "play"
};

/// Runs a bandit algorithm directly against the environment for T rounds.
/// Streams are keyed exactly like the reduction's dedicated rounds, so a
/// standalone run and a wrapped run with the same (root_seed, replicate) see
/// identical (arm, reward) sequences round for round.
StandaloneRun run_standalone_bandit(Environment& env, const WrappedFactory& make_algo,
                                    std::int64_t T, std::uint64_t root_seed,
                                    std::uint64_t replicate);

}  // namespace bicex
