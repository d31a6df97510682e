#include "bicex/detail_free.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

#include "bicex/rng.hpp"

namespace bicex {

namespace {

Transcript begin_df_transcript(const Environment& env, std::uint64_t root_seed,
                               std::uint64_t replicate) {
  Transcript t;
  t.root_seed = root_seed;
  t.replicate = replicate;
  t.num_contexts = 0;
  t.means = env.instance.means;
  return t;
}

double checked_reward(Environment& env, int arm, RngStream& rng) {
  const double r = env.draw(arm, rng);
  if (r < 0.0 || r > 1.0) {
    throw std::domain_error("detail-free rewards must lie in [0, 1]");
  }
  return r;
}

void append_row(Transcript& t, std::int64_t round, int arm, double reward,
                std::uint16_t role) {
  TranscriptRow row;
  row.round = round;
  row.arm = arm;
  row.reward = reward;
  row.role = role;
  t.rows.push_back(std::move(row));
}

void check_prior_means(const std::vector<double>& prior_means, int num_arms) {
  if (static_cast<int>(prior_means.size()) != num_arms) {
    throw std::invalid_argument("prior_means size must match the number of arms");
  }
  for (std::size_t i = 1; i < prior_means.size(); ++i) {
    if (prior_means[i] > prior_means[i - 1] + 1e-12) {
      throw std::invalid_argument("prior means must be non-increasing over arms");
    }
  }
}

struct RaceState {
  std::vector<ArmStats> stats;
  std::vector<bool> active;
  int num_active = 0;

  explicit RaceState(const Dataset& samples)
      : stats(samples.arms), active(samples.arms.size(), true),
        num_active(static_cast<int>(samples.arms.size())) {}

  std::int64_t min_active_count() const {
    std::int64_t n = -1;
    for (std::size_t i = 0; i < stats.size(); ++i) {
      if (!active[i]) continue;
      if (n < 0 || stats[i].n < n) n = stats[i].n;
    }
    return n;
  }

  int leader() const {
    int best = -1;
    for (std::size_t i = 0; i < stats.size(); ++i) {
      if (!active[i]) continue;
      if (best < 0 || stats[i].mean() > stats[best].mean()) best = static_cast<int>(i);
    }
    return best;
  }
};

DfRaceRun run_race(const Dataset& samples, const DfRaceConfig& cfg, Environment& env,
                   std::uint64_t root_seed, std::uint64_t replicate) {
  const int m = env.num_arms();
  if (m < 2) throw std::invalid_argument("racing needs at least two arms");
  if (static_cast<int>(samples.arms.size()) != m) {
    throw std::invalid_argument("samples must cover every arm");
  }
  for (const ArmStats& st : samples.arms) {
    if (st.n < 1) throw std::invalid_argument("racing needs at least one sample per arm");
  }
  if (cfg.theta < 1.0) throw std::invalid_argument("theta must be at least 1");
  if (cfg.T < 1) throw std::invalid_argument("horizon must be positive");
  if (cfg.rounds < 0) throw std::invalid_argument("racing rounds must be nonnegative");

  DfRaceRun run;
  run.transcript = begin_df_transcript(env, root_seed, replicate);
  const std::uint16_t race_role = run.transcript.role_id("race");
  const std::uint16_t commit_role = run.transcript.role_id("commit");

  RaceState state(samples);
  std::vector<RngStream> arm_rw;
  arm_rw.reserve(static_cast<std::size_t>(m));
  for (int a = 0; a < m; ++a) {
    arm_rw.push_back(RngStream::derive(root_seed, replicate, "race-rw",
                                       static_cast<std::uint64_t>(a)));
  }

  const double log_horizon = std::log(static_cast<double>(cfg.T) * cfg.theta);
  auto recompute_active = [&]() {
    const std::int64_t n = state.min_active_count();
    const double c_n = std::sqrt(std::max(log_horizon, 0.0) / static_cast<double>(n));
    const double lead = state.stats[state.leader()].mean();
    for (int a = 0; a < m; ++a) {
      if (!state.active[a]) continue;
      if (lead - state.stats[a].mean() > c_n) {
        state.active[a] = false;
        state.num_active -= 1;
        run.eliminated_order.push_back(a);
      }
    }
  };

  std::int64_t round = 0;
  bool committed = false;
  while (round < cfg.rounds) {
    if (!committed) {
      recompute_active();
      if (state.num_active == 1) {
        committed = true;
        run.commit_round = round + 1;
      }
    }
    if (committed) {
      const int a = state.leader();
      const double r = env.draw(a, arm_rw[static_cast<std::size_t>(a)]);
      state.stats[static_cast<std::size_t>(a)].add(r);
      round += 1;
      append_row(run.transcript, round, a, r, commit_role);
      continue;
    }
    for (int a = 0; a < m && round < cfg.rounds; ++a) {
      if (!state.active[a]) continue;
      const double r = env.draw(a, arm_rw[static_cast<std::size_t>(a)]);
      state.stats[static_cast<std::size_t>(a)].add(r);
      round += 1;
      append_row(run.transcript, round, a, r, race_role);
    }
  }
  if (!committed) recompute_active();
  run.survivor = state.leader();
  return run;
}

}  // namespace

DfSamplingRun run_df_sampling_m(const DfSamplingConfig& cfg, Environment& env,
                                const std::vector<double>& prior_means,
                                std::uint64_t root_seed, std::uint64_t replicate) {
  const int m = env.num_arms();
  if (m < 2) throw std::invalid_argument("sampling needs at least two arms");
  check_prior_means(prior_means, m);
  if (cfg.k < 1 || cfg.L < 1) throw std::invalid_argument("k and L must be positive");
  if (cfg.C <= 0.0) throw std::invalid_argument("safety margin C must be positive");

  DfSamplingRun run;
  run.transcript = begin_df_transcript(env, root_seed, replicate);
  run.samples = Dataset(m);
  const std::uint16_t init_role = run.transcript.role_id("init");

  RngStream init_rw = RngStream::derive(root_seed, replicate, "init-rw", 0);
  std::int64_t round = 0;
  for (std::int64_t t = 0; t < cfg.k; ++t) {
    const double r = checked_reward(env, 0, init_rw);
    run.samples.add(0, r);
    round += 1;
    append_row(run.transcript, round, 0, r, init_role);
  }

  std::vector<double> averages(static_cast<std::size_t>(m), 0.0);
  averages[0] = run.samples.arms[0].mean();

  const std::int64_t phase_len = cfg.L * cfg.k;
  for (int i = 2; i <= m; ++i) {
    const int arm = i - 1;
    bool exploit_new = averages[0] < prior_means[static_cast<std::size_t>(arm)] - cfg.C;
    for (int j = 1; j < arm && exploit_new; ++j) {
      const double avg = averages[static_cast<std::size_t>(j)];
      exploit_new = averages[0] + cfg.C < avg &&
                    avg < prior_means[static_cast<std::size_t>(arm)] - cfg.C;
    }
    const int a_star = exploit_new ? arm : 0;
    run.exploit_arms.push_back(a_star);

    const std::uint16_t role =
        run.transcript.role_id("explore:" + std::to_string(i));
    RngStream q_rng = RngStream::derive(root_seed, replicate, "phase-q",
                                        static_cast<std::uint64_t>(i));
    const std::vector<int> dedicated =
        q_rng.subset(static_cast<int>(phase_len), static_cast<int>(cfg.k));
    RngStream phase_rw = RngStream::derive(root_seed, replicate, "phase-rw",
                                           static_cast<std::uint64_t>(i));
    std::size_t next_slot = 0;
    ArmStats collected;
    for (std::int64_t s = 0; s < phase_len; ++s) {
      const bool is_dedicated =
          next_slot < dedicated.size() && dedicated[next_slot] == s;
      const int played = is_dedicated ? arm : a_star;
      const double r = checked_reward(env, played, phase_rw);
      round += 1;
      append_row(run.transcript, round, played, r, role);
      if (is_dedicated) {
        collected.add(r);
        run.dedicated_rounds.push_back(round);
        next_slot += 1;
      }
    }
    run.samples.arms[static_cast<std::size_t>(arm)] = collected;
    averages[static_cast<std::size_t>(arm)] = collected.mean();
  }
  return run;
}

DfSamplingRun run_df_two_arm_sampling(const DfTwoArmSamplingConfig& cfg, Environment& env,
                                      const std::vector<double>& prior_means,
                                      std::uint64_t root_seed, std::uint64_t replicate) {
  if (env.num_arms() != 2) throw std::invalid_argument("two-arm sampling needs exactly two arms");
  check_prior_means(prior_means, 2);
  if (cfg.k < 1 || cfg.k_star < 1 || cfg.L < 1) {
    throw std::invalid_argument("k, k_star, and L must be positive");
  }
  if (cfg.C <= 0.0) throw std::invalid_argument("safety margin C must be positive");

  DfSamplingRun run;
  run.transcript = begin_df_transcript(env, root_seed, replicate);
  run.samples = Dataset(2);
  const std::uint16_t init_role = run.transcript.role_id("init");
  const std::uint16_t explore_role = run.transcript.role_id("explore:2");

  RngStream init_rw = RngStream::derive(root_seed, replicate, "init-rw", 0);
  const std::int64_t initial = std::max(cfg.k, cfg.k_star);
  std::int64_t round = 0;
  for (std::int64_t t = 0; t < initial; ++t) {
    const double r = checked_reward(env, 0, init_rw);
    run.samples.add(0, r);
    round += 1;
    append_row(run.transcript, round, 0, r, init_role);
  }

  const int a_star = run.samples.arms[0].mean() <= prior_means[1] - cfg.C ? 1 : 0;
  for (std::int64_t phase = 1; phase <= cfg.k; ++phase) {
    run.exploit_arms.push_back(a_star);
    const std::int64_t slot =
        RngStream::derive(root_seed, replicate, "ded", static_cast<std::uint64_t>(phase))
            .below(cfg.L);
    RngStream phase_rw = RngStream::derive(root_seed, replicate, "phase-rw",
                                           static_cast<std::uint64_t>(phase));
    for (std::int64_t s = 0; s < cfg.L; ++s) {
      const bool is_dedicated = s == slot;
      const int played = is_dedicated ? 1 : a_star;
      const double r = checked_reward(env, played, phase_rw);
      round += 1;
      append_row(run.transcript, round, played, r, explore_role);
      if (is_dedicated) {
        run.samples.add(1, r);
        run.dedicated_rounds.push_back(round);
      }
    }
  }
  return run;
}

DfRaceRun run_df_race_m(const Dataset& samples, const DfRaceConfig& cfg, Environment& env,
                        std::uint64_t root_seed, std::uint64_t replicate) {
  return run_race(samples, cfg, env, root_seed, replicate);
}

DfRaceRun run_df_two_arm_race(const Dataset& samples, const DfRaceConfig& cfg,
                              Environment& env, std::uint64_t root_seed,
                              std::uint64_t replicate) {
  if (env.num_arms() != 2) throw std::invalid_argument("two-arm race needs exactly two arms");
  return run_race(samples, cfg, env, root_seed, replicate);
}

DetailFreeRun run_detail_free(const DetailFreeConfig& cfg, Environment& env,
                              const std::vector<double>& prior_means,
                              std::uint64_t root_seed, std::uint64_t replicate) {
  const int m = env.num_arms();
  if (m < 2) throw std::invalid_argument("detail-free run needs at least two arms");
  check_prior_means(prior_means, m);
  if (cfg.mu_hat <= 0.0) throw std::invalid_argument("mu_hat must be positive");
  if (cfg.N < 1) throw std::invalid_argument("N must be positive");
  if (cfg.tau <= 0.0 || cfg.tau >= 1.0) throw std::invalid_argument("tau must lie in (0, 1)");
  if (cfg.theta && *cfg.theta < 1.0) throw std::invalid_argument("theta must be at least 1");

  DetailFreeRun out;
  out.C = cfg.mu_hat / 6.0;
  out.k = cfg.N;
  out.L = cfg.N;
  out.theta = cfg.theta.value_or(static_cast<double>(cfg.N));
  out.sampling_rounds = cfg.N + cfg.N * cfg.N * static_cast<std::int64_t>(m - 1);
  if (cfg.T <= out.sampling_rounds) {
    throw std::invalid_argument("horizon must exceed the sampling stage length");
  }

  DfSamplingConfig sampling_cfg;
  sampling_cfg.k = out.k;
  sampling_cfg.L = out.L;
  sampling_cfg.C = out.C;
  DfSamplingRun sampling =
      run_df_sampling_m(sampling_cfg, env, prior_means, root_seed, replicate);

  DfRaceConfig race_cfg;
  race_cfg.k = out.k;
  race_cfg.theta = out.theta;
  race_cfg.T = cfg.T;
  race_cfg.rounds = cfg.T - out.sampling_rounds;
  DfRaceRun race = run_race(sampling.samples, race_cfg, env, root_seed, replicate);

  out.transcript = std::move(sampling.transcript);
  for (TranscriptRow row : race.transcript.rows) {
    row.round += out.sampling_rounds;
    row.role = out.transcript.role_id(race.transcript.roles[row.role]);
    out.transcript.rows.push_back(std::move(row));
  }
  out.survivor = race.survivor;
  return out;
}

}  // namespace bicex
