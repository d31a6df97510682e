#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bicex/rng.hpp"

namespace bicex {

/// Reward distribution attached to one arm; mu is the arm's mean reward.
struct RewardFamily {
  enum class Kind { bernoulli, gaussian, point_mass };
  Kind kind = Kind::bernoulli;
  double noise_var = 0.0;  // gaussian only

  bool bounded_01() const { return kind == Kind::bernoulli; }
};

double draw_reward(const RewardFamily& family, double mu, RngStream& rng);

/// One realized bandit problem: the latent mean of every arm.
struct MabInstance {
  std::vector<double> means;

  int num_arms() const { return static_cast<int>(means.size()); }
  double best_mean() const;
};

/// Per-arm sufficient statistics of observed rewards. Enough for every
/// posterior family used here: Bernoulli needs (n, sum), Gaussian needs
/// (n, sum, sum2), point rewards need any single value.
struct ArmStats {
  std::int64_t n = 0;
  double sum = 0.0;
  double sum2 = 0.0;

  void add(double r) {
    n += 1;
    sum += r;
    sum2 += r * r;
  }
  double mean() const { return sum / static_cast<double>(n); }
};

struct Dataset {
  std::vector<ArmStats> arms;

  explicit Dataset(int num_arms = 0) : arms(static_cast<std::size_t>(num_arms)) {}
  void add(int arm, double r) { arms.at(static_cast<std::size_t>(arm)).add(r); }
  std::int64_t count(int arm) const { return arms.at(static_cast<std::size_t>(arm)).n; }
};

/// Sentinel prediction emitted before the wrapped algorithm has produced one.
/// Distinct from every real prediction token by construction: algorithm
/// tokens never start with an underscore.
inline const std::string kNullPrediction = "__null__";

struct TranscriptRow {
  std::int64_t round = 0;  // 1-based
  int context = -1;        // -1 when the run has no contexts
  int arm = 0;             // 0-based in memory, serialized 1-based
  double reward = 0.0;
  std::uint16_t role = 0;  // index into Transcript::roles
  std::optional<std::string> feedback;
  std::optional<std::string> prediction;
};

/// Full record of one run: per-round rows plus the realized instance and the
/// seed key needed to replay it. Serializes to JSON lines and CSV; replaying
/// the same (seed, config) reproduces the bytes exactly.
struct Transcript {
  std::uint64_t root_seed = 0;
  std::uint64_t replicate = 0;
  int num_contexts = 0;              // 0 for plain MAB runs
  std::vector<double> means;         // MAB: per arm; contextual: arm-major [arm*X + x]
  std::vector<std::string> roles;    // structural phase labels, indexed by row.role
  std::vector<TranscriptRow> rows;

  int num_arms() const {
    return num_contexts == 0 ? static_cast<int>(means.size())
                             : static_cast<int>(means.size()) / num_contexts;
  }
  double mean_of(int arm, int context) const {
    if (num_contexts == 0) return means[static_cast<std::size_t>(arm)];
    const std::size_t x = context < 0 ? 0 : static_cast<std::size_t>(context);
    return means[static_cast<std::size_t>(arm) * static_cast<std::size_t>(num_contexts) + x];
  }
  std::uint16_t role_id(const std::string& label);

  void to_jsonl(std::ostream& os) const;
  void to_csv(std::ostream& os) const;
  static Transcript from_jsonl(std::istream& is);
};

}  // namespace bicex
