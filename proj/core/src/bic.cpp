#include "bicex/bic.hpp"

#include <algorithm>
#include <stdexcept>

namespace bicex {

namespace {

void check_shapes(const PriorModel& prior, const Environment& env, std::int64_t k,
                  std::int64_t L) {
  if (env.num_arms() != prior.num_arms()) {
    throw std::invalid_argument("sampler: environment and prior disagree on arm count");
  }
  if (k < 1 || L < 1) throw std::invalid_argument("sampler: k and L must be >= 1");
}

Transcript begin_transcript(const Environment& env, std::uint64_t root_seed,
                            std::uint64_t replicate) {
  Transcript t;
  t.root_seed = root_seed;
  t.replicate = replicate;
  t.num_contexts = 0;
  t.means = env.instance.means;
  return t;
}

struct MArmStage {
  Dataset samples;
  std::vector<int> exploit_arms;
  std::vector<std::int64_t> dedicated_rounds;
  std::int64_t rounds = 0;
};

/// Shared by the standalone m-arm sampler and the reduction so both produce
/// identical sampling-stage rows under the same keys.
MArmStage append_m_arm_sampling(const PriorModel& prior, const SamplerConfig& cfg,
                                Environment& env, std::uint64_t root_seed,
                                std::uint64_t replicate, Transcript& out) {
  const int m = prior.num_arms();
  MArmStage stage;
  stage.samples = Dataset(m);
  std::int64_t round = 0;

  const std::uint16_t init_role = out.role_id("init");
  RngStream init_rng = RngStream::derive(root_seed, replicate, "init-rw", 0);
  for (std::int64_t s = 0; s < cfg.k; ++s) {
    const double reward = env.draw(0, init_rng);
    stage.samples.add(0, reward);
    out.rows.push_back(TranscriptRow{++round, -1, 0, reward, init_role, {}, {}});
  }

  for (int i = 2; i <= m; ++i) {
    const int arm = i - 1;
    const std::uint16_t role = out.role_id("explore:" + std::to_string(i));
    const int a_star = exploit_arm(prior, stage.samples);
    stage.exploit_arms.push_back(a_star);

    RngStream q_rng =
        RngStream::derive(root_seed, replicate, "phase-q", static_cast<std::uint64_t>(i));
    const std::vector<int> q =
        q_rng.subset(static_cast<int>(cfg.L * cfg.k), static_cast<int>(cfg.k));
    RngStream phase_rng =
        RngStream::derive(root_seed, replicate, "phase-rw", static_cast<std::uint64_t>(i));

    std::size_t q_at = 0;
    std::vector<double> collected;
    collected.reserve(static_cast<std::size_t>(cfg.k));
    for (std::int64_t pos = 0; pos < cfg.L * cfg.k; ++pos) {
      const bool dedicated = q_at < q.size() && q[q_at] == pos;
      const int play = dedicated ? arm : a_star;
      const double reward = env.draw(play, phase_rng);
      out.rows.push_back(TranscriptRow{++round, -1, play, reward, role, {}, {}});
      if (dedicated) {
        ++q_at;
        collected.push_back(reward);
        stage.dedicated_rounds.push_back(round);
      }
    }
    for (double r : collected) stage.samples.add(arm, r);
  }
  stage.rounds = round;
  return stage;
}

}  // namespace

int exploit_arm(const PriorModel& prior, const Dataset& data) {
  int best = 0;
  double best_mean = posterior_mean(prior, data, 0);
  for (int j = 1; j < prior.num_arms(); ++j) {
    const double mean = posterior_mean(prior, data, j);
    if (mean > best_mean) {
      best_mean = mean;
      best = j;
    }
  }
  return best;
}

SamplerRun run_two_arm_sampler(const PriorModel& prior, const SamplerConfig& cfg,
                               Environment& env, std::uint64_t root_seed,
                               std::uint64_t replicate, const RunOptions&) {
  if (prior.num_arms() != 2) {
    throw std::invalid_argument("run_two_arm_sampler: needs exactly two arms");
  }
  check_shapes(prior, env, cfg.k, cfg.L);

  SamplerRun run;
  run.transcript = begin_transcript(env, root_seed, replicate);
  run.samples = Dataset(2);
  std::int64_t round = 0;

  const std::uint16_t init_role = run.transcript.role_id("init");
  const std::int64_t initial = std::max(cfg.k, cfg.L);
  RngStream init_rng = RngStream::derive(root_seed, replicate, "init-rw", 0);
  for (std::int64_t s = 0; s < initial; ++s) {
    const double reward = env.draw(0, init_rng);
    run.samples.add(0, reward);
    run.transcript.rows.push_back(TranscriptRow{++round, -1, 0, reward, init_role, {}, {}});
  }

  const int a_star = exploit_arm(prior, run.samples);
  run.exploit_arms.push_back(a_star);

  const std::uint16_t role = run.transcript.role_id("explore:2");
  for (std::int64_t phase = 1; phase <= cfg.k; ++phase) {
    const std::uint64_t slot =
        RngStream::derive(root_seed, replicate, "ded", static_cast<std::uint64_t>(phase))
            .below(static_cast<std::uint64_t>(cfg.L));
    RngStream phase_rng =
        RngStream::derive(root_seed, replicate, "phase-rw", static_cast<std::uint64_t>(phase));
    for (std::int64_t pos = 0; pos < cfg.L; ++pos) {
      const bool dedicated = static_cast<std::uint64_t>(pos) == slot;
      const int play = dedicated ? 1 : a_star;
      const double reward = env.draw(play, phase_rng);
      run.transcript.rows.push_back(TranscriptRow{++round, -1, play, reward, role, {}, {}});
      if (dedicated) {
        run.samples.add(1, reward);
        run.dedicated_rounds.push_back(round);
      }
    }
  }
  return run;
}

SamplerRun run_m_arm_sampler(const PriorModel& prior, const SamplerConfig& cfg,
                             Environment& env, std::uint64_t root_seed,
                             std::uint64_t replicate, const RunOptions&) {
  check_shapes(prior, env, cfg.k, cfg.L);
  SamplerRun run;
  run.transcript = begin_transcript(env, root_seed, replicate);
  MArmStage stage =
      append_m_arm_sampling(prior, cfg, env, root_seed, replicate, run.transcript);
  run.samples = std::move(stage.samples);
  run.exploit_arms = std::move(stage.exploit_arms);
  run.dedicated_rounds = std::move(stage.dedicated_rounds);
  return run;
}

ReductionRun run_black_box_reduction(const PriorModel& prior, const ReductionConfig& cfg,
                                     const WrappedFactory& make_algo, Environment& env,
                                     std::uint64_t root_seed, std::uint64_t replicate,
                                     const RunOptions& opts) {
  check_shapes(prior, env, cfg.k, cfg.L);
  const int m = prior.num_arms();
  const std::int64_t c = cfg.k + (m - 1) * cfg.L * cfg.k;
  if (cfg.T < c) {
    throw std::invalid_argument("run_black_box_reduction: T is below the sampling-stage length");
  }

  ReductionRun run;
  run.transcript = begin_transcript(env, root_seed, replicate);
  run.sampling_rounds = c;

  const SamplerConfig sampler_cfg{cfg.k, cfg.L};
  MArmStage stage =
      append_m_arm_sampling(prior, sampler_cfg, env, root_seed, replicate, run.transcript);
  Dataset data = std::move(stage.samples);
  if (opts.record_predictions) {
    for (TranscriptRow& row : run.transcript.rows) row.prediction = kNullPrediction;
  }

  ProtocolChecked algo(make_algo(RngStream::derive(root_seed, replicate, "algo", 0)));
  const std::uint16_t sim_role = run.transcript.role_id("sim");
  std::int64_t round = c;
  std::int64_t phase = 0;

  while (round < cfg.T) {
    ++phase;
    const std::int64_t len = std::min(cfg.L, cfg.T - round);
    const int a_star = exploit_arm(prior, data);
    run.exploit_arms.push_back(a_star);

    if (len < cfg.L) {
      // Trailing partial phase: exploit-only, the wrapped algorithm does not
      // advance and no dedicated round exists.
      RngStream sim_rng =
          RngStream::derive(root_seed, replicate, "sim-rw", static_cast<std::uint64_t>(phase));
      for (std::int64_t pos = 0; pos < len; ++pos) {
        const double reward = env.draw(a_star, sim_rng);
        data.add(a_star, reward);
        run.transcript.rows.push_back(
            TranscriptRow{++round, -1, a_star, reward, sim_role, {}, {}});
        if (opts.record_predictions && round <= c + cfg.L) {
          run.transcript.rows.back().prediction = kNullPrediction;
        }
      }
      break;
    }

    const int wrapped = algo.next_arm();
    if (wrapped < 0 || wrapped >= m) {
      throw std::logic_error("run_black_box_reduction: wrapped algorithm returned a bad arm");
    }
    run.wrapped_arms.push_back(wrapped);
    const std::uint64_t slot =
        RngStream::derive(root_seed, replicate, "ded", static_cast<std::uint64_t>(phase))
            .below(static_cast<std::uint64_t>(cfg.L));
    RngStream sim_rng =
        RngStream::derive(root_seed, replicate, "sim-rw", static_cast<std::uint64_t>(phase));

    double dedicated_reward = 0.0;
    const std::size_t first_row = run.transcript.rows.size();
    for (std::int64_t pos = 0; pos < cfg.L; ++pos) {
      const bool dedicated = static_cast<std::uint64_t>(pos) == slot;
      const int play = dedicated ? wrapped : a_star;
      double reward;
      if (dedicated) {
        RngStream ded_rng = RngStream::derive(root_seed, replicate, "wrapped-rw",
                                              static_cast<std::uint64_t>(phase));
        reward = env.draw(play, ded_rng);
        dedicated_reward = reward;
        run.dedicated_rounds.push_back(round + pos + 1);
      } else {
        reward = env.draw(play, sim_rng);
      }
      data.add(play, reward);
      run.transcript.rows.push_back(
          TranscriptRow{round + pos + 1, -1, play, reward, sim_role, {}, {}});
    }
    round += cfg.L;

    algo.observe(wrapped, dedicated_reward);
    if (opts.record_predictions) {
      run.phase_predictions.push_back(algo.predict());
      for (std::size_t r = first_row; r < run.transcript.rows.size(); ++r) {
        TranscriptRow& row = run.transcript.rows[r];
        const std::int64_t idx = (row.round - c) / cfg.L;
        if (row.round <= c + cfg.L || idx < 1) {
          row.prediction = kNullPrediction;
        } else {
          const std::optional<std::string>& phi =
              run.phase_predictions[static_cast<std::size_t>(idx - 1)];
          row.prediction = phi.has_value() ? *phi : kNullPrediction;
        }
      }
    }
  }

  if (opts.record_predictions && !run.phase_predictions.empty()) {
    // The trailing partial phase was appended before its phi index existed.
    for (std::size_t r = run.transcript.rows.size(); r-- > 0;) {
      TranscriptRow& row = run.transcript.rows[r];
      if (row.prediction.has_value() || row.round <= c + cfg.L) break;
      const std::int64_t idx = (row.round - c) / cfg.L;
      const std::size_t capped =
          std::min(static_cast<std::size_t>(idx), run.phase_predictions.size());
      const std::optional<std::string>& phi = run.phase_predictions[capped - 1];
      row.prediction = phi.has_value() ? *phi : kNullPrediction;
    }
  }
  return run;
}

}  // namespace bicex
