#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "bicex/environment.hpp"
#include "bicex/model.hpp"

namespace bicex {

// The detail-free algorithms touch the prior only through the published
// per-arm prior means and run entirely on sample averages; nothing in this
// header depends on posterior machinery.

struct DfSamplingConfig {
  std::int64_t k = 1;
  std::int64_t L = 1;
  double C = 0.0;
};

struct DfSamplingRun {
  Transcript transcript;
  Dataset samples;
  std::vector<int> exploit_arms;               // a*_i per phase i = 2..m (0-based arms)
  std::vector<std::int64_t> dedicated_rounds;  // 1-based
};

/// Detail-free sampling for m arms: k rounds of arm 1, then per arm i = 2..m
/// a phase of Lk rounds with a uniform k-subset on arm i and the rest on the
/// sample-average exploit rule with safety margin C. Rewards must lie in
/// [0, 1]. Total rounds: k + (m-1)Lk.
DfSamplingRun run_df_sampling_m(const DfSamplingConfig& cfg, Environment& env,
                                const std::vector<double>& prior_means,
                                std::uint64_t root_seed, std::uint64_t replicate);

struct DfTwoArmSamplingConfig {
  std::int64_t k = 1;
  std::int64_t k_star = 1;  // initial block is max(k, k_star) rounds of arm 1
  std::int64_t L = 1;
  double C = 0.0;
};

/// Two-arm detail-free sampling: max(k, k_star) rounds of arm 1, then k
/// phases of L rounds each giving arm 2 to one uniformly placed agent; the
/// exploit arm is 2 iff the arm-1 average is at most mu_2^0 - C. Total
/// rounds: max(k, k_star) + Lk.
DfSamplingRun run_df_two_arm_sampling(const DfTwoArmSamplingConfig& cfg, Environment& env,
                                      const std::vector<double>& prior_means,
                                      std::uint64_t root_seed, std::uint64_t replicate);

struct DfRaceConfig {
  std::int64_t k = 1;       // per-arm sample count the race starts from
  double theta = 1.0;
  std::int64_t T = 1;       // horizon inside c_n = sqrt(ln(T * theta) / n)
  std::int64_t rounds = 0;  // racing rounds to emit
};

struct DfRaceRun {
  Transcript transcript;
  int survivor = 0;               // committed arm, or the leader at the horizon
  std::int64_t commit_round = 0;  // 1-based first commit round; 0 if the race never committed
  std::vector<int> eliminated_order;
};

/// Racing stage: starting from the provided per-arm samples, each phase
/// recomputes the active set B = {i : leader average - own average <= c_n}
/// and recommends every active arm once in arm order; once one arm remains it
/// is recommended for all remaining rounds. Eliminated arms are never
/// sampled again.
DfRaceRun run_df_race_m(const Dataset& samples, const DfRaceConfig& cfg, Environment& env,
                        std::uint64_t root_seed, std::uint64_t replicate);

/// Two-arm race: alternates both arms while the averages are within c_n,
/// then commits to the leader. Identical rule to run_df_race_m at m = 2.
DfRaceRun run_df_two_arm_race(const Dataset& samples, const DfRaceConfig& cfg,
                              Environment& env, std::uint64_t root_seed,
                              std::uint64_t replicate);

struct DetailFreeConfig {
  double mu_hat = 0.0;  // coarse estimate of the lowest prior mean, in (0, 2 mu_m^0]
  std::int64_t N = 1;   // master parameter: C = mu_hat / 6, k = L = theta = N
  std::int64_t T = 1;
  double tau = 0.1;             // racing margin used for threshold reports
  std::optional<double> theta;  // override; defaults to N
};

struct DetailFreeRun {
  Transcript transcript;
  double C = 0.0;
  std::int64_t k = 0;
  std::int64_t L = 0;
  double theta = 0.0;
  std::int64_t sampling_rounds = 0;  // f(N) = N + N^2 (m - 1)
  int survivor = 0;
};

/// Full detail-free pipeline: sampling stage then race, sharing one
/// transcript. Requires mu_hat > 0 and T > f(N).
DetailFreeRun run_detail_free(const DetailFreeConfig& cfg, Environment& env,
                              const std::vector<double>& prior_means,
                              std::uint64_t root_seed, std::uint64_t replicate);

}  // namespace bicex
