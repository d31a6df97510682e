#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bicex/bandit.hpp"
#include "bicex/environment.hpp"
#include "bicex/model.hpp"
#include "bicex/priors.hpp"

namespace bicex {

struct SamplerConfig {
  std::int64_t k = 1;
  std::int64_t L = 1;
};

struct RunOptions {
  // Audit paths disable prediction bookkeeping; it never changes the
  // recommendation or reward sequence.
  bool record_predictions = true;
};

struct SamplerRun {
  Transcript transcript;
  Dataset samples;
  std::vector<int> exploit_arms;  // two-arm: the single a*; m-arm: a*_i per phase i = 2..m
  std::vector<std::int64_t> dedicated_rounds;  // 1-based rounds carrying the explored arm
};

/// Collects k samples of both arms: max(k, L) rounds of arm 1, then k phases
/// of length L, each recommending arm 2 to one uniformly placed agent and the
/// posterior-best arm a* to the rest. Total rounds: max(k, L) + kL.
SamplerRun run_two_arm_sampler(const PriorModel& prior, const SamplerConfig& cfg,
                               Environment& env, std::uint64_t root_seed,
                               std::uint64_t replicate, const RunOptions& opts = {});

/// Sampling stage for m arms: k rounds of arm 1, then per arm i = 2..m one
/// phase of Lk rounds in which a uniform k-subset receives arm i and everyone
/// else the posterior-best arm given the samples of arms before i. Total
/// rounds: k + (m-1)Lk; returns exactly k samples per arm.
SamplerRun run_m_arm_sampler(const PriorModel& prior, const SamplerConfig& cfg,
                             Environment& env, std::uint64_t root_seed,
                             std::uint64_t replicate, const RunOptions& opts = {});

struct ReductionConfig {
  std::int64_t k = 1;
  std::int64_t L = 1;
  std::int64_t T = 0;  // must cover the sampling stage
};

struct ReductionRun {
  Transcript transcript;
  std::int64_t sampling_rounds = 0;  // c = k + (m-1)Lk
  std::vector<int> wrapped_arms;     // i_n chosen by the wrapped algorithm, per full phase
  std::vector<int> exploit_arms;     // a*_n per phase (includes a trailing partial phase)
  std::vector<std::optional<std::string>> phase_predictions;  // phi_n, post-observation
  std::vector<std::int64_t> dedicated_rounds;  // round of phase n's dedicated agent
};

/// Black-box simulation wrapped around a bandit algorithm: chains the m-arm
/// sampling stage, then runs phases of L rounds in which one uniformly placed
/// agent receives the wrapped algorithm's arm and only that agent's reward is
/// fed back to it; every phase sample joins the dataset. Rounds of the
/// sampling stage and of phase 1 carry the null prediction; later rounds t
/// carry phi at index floor((t - c) / L).
ReductionRun run_black_box_reduction(const PriorModel& prior, const ReductionConfig& cfg,
                                     const WrappedFactory& make_algo, Environment& env,
                                     std::uint64_t root_seed, std::uint64_t replicate,
                                     const RunOptions& opts = {});

/// Argmax of the posterior mean over arms, ties to the lowest index.
int exploit_arm(const PriorModel& prior, const Dataset& data);

}  // namespace bicex
