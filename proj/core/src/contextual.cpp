#include "bicex/contextual.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "bicex/parallel.hpp"
#include "bicex/stats.hpp"

namespace bicex {

namespace {

constexpr double kTol = 1e-12;

// Posterior queries for one prior; offset correlation reuses the joint
// machinery with one per-context model built once up front.
class PosteriorBackend {
 public:
  explicit PosteriorBackend(const ContextualPrior& prior) : prior_(prior) {
    if (prior_.correlation() == Correlation::offset) {
      models_.reserve(static_cast<std::size_t>(prior_.num_contexts()));
      for (int x = 0; x < prior_.num_contexts(); ++x) {
        models_.emplace_back(std::vector<ArmMarginal>{prior_.cell(0, x)}, prior_.rewards(),
                             Correlation::offset, prior_.offsets());
      }
    }
  }

  double mean(const ContextualDataset& data, int arm, int context,
              const PosteriorOptions& opts) const {
    if (prior_.correlation() == Correlation::independent) {
      return marginal_posterior_mean(prior_.cell(arm, context), prior_.reward(arm),
                                     data.at(arm, context));
    }
    Dataset joint(prior_.num_arms());
    for (int a = 0; a < prior_.num_arms(); ++a) {
      joint.arms[static_cast<std::size_t>(a)] = data.at(a, context);
    }
    return posterior_mean(models_[static_cast<std::size_t>(context)], joint, arm, opts);
  }

  int exploit(const ContextualDataset& data, int context, const PosteriorOptions& opts) const {
    int best = 0;
    double best_mean = mean(data, 0, context, opts);
    for (int a = 1; a < prior_.num_arms(); ++a) {
      const double v = mean(data, a, context, opts);
      if (v > best_mean) {
        best = a;
        best_mean = v;
      }
    }
    return best;
  }

 private:
  const ContextualPrior& prior_;
  std::vector<PriorModel> models_;
};

void check_dataset_shape(const ContextualPrior& prior, const ContextualDataset& data) {
  if (data.arms != prior.num_arms() || data.contexts != prior.num_contexts()) {
    throw std::invalid_argument("contextual dataset shape does not match the prior");
  }
}

}  // namespace

ContextualPrior::ContextualPrior(std::vector<ArmMarginal> cells,
                                 std::vector<RewardFamily> rewards, ContextSpace contexts,
                                 Correlation correlation, std::vector<double> offsets,
                                 FeedbackKind feedback, double feedback_noise_var)
    : cells_(std::move(cells)),
      rewards_(std::move(rewards)),
      space_(std::move(contexts)),
      correlation_(correlation),
      offsets_(std::move(offsets)),
      feedback_(feedback),
      feedback_noise_var_(feedback_noise_var) {
  if (space_.weights.empty()) {
    throw std::invalid_argument("ContextualPrior: context space must be nonempty");
  }
  double wsum = 0.0;
  for (const double w : space_.weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("ContextualPrior: negative context weight");
    wsum += w;
  }
  if (wsum <= 0.0) throw std::invalid_argument("ContextualPrior: context weights sum to zero");
  cum_weights_.reserve(space_.weights.size());
  double cum = 0.0;
  for (double& w : space_.weights) {
    w /= wsum;
    cum += w;
    cum_weights_.push_back(cum);
  }
  cum_weights_.back() = 1.0;

  num_arms_ = static_cast<int>(rewards_.size());
  if (num_arms_ < 2) throw std::invalid_argument("ContextualPrior: need at least two arms");
  const std::size_t contexts_n = space_.weights.size();
  if (correlation_ == Correlation::independent) {
    if (!offsets_.empty()) {
      throw std::invalid_argument("ContextualPrior: offsets require offset correlation");
    }
    if (cells_.size() != static_cast<std::size_t>(num_arms_) * contexts_n) {
      throw std::invalid_argument("ContextualPrior: need one cell marginal per (arm, context)");
    }
  } else {
    if (cells_.size() != contexts_n) {
      throw std::invalid_argument("ContextualPrior: offset correlation takes one base per context");
    }
    if (offsets_.size() != static_cast<std::size_t>(num_arms_)) {
      throw std::invalid_argument("ContextualPrior: one offset per arm required");
    }
    if (offsets_[0] != 0.0) {
      throw std::invalid_argument("ContextualPrior: the first offset must be 0");
    }
    for (std::size_t a = 1; a < offsets_.size(); ++a) {
      if (offsets_[a] < offsets_[a - 1] - kTol) {
        throw std::invalid_argument("ContextualPrior: offsets must be nondecreasing");
      }
    }
  }
  if (feedback_ == FeedbackKind::noisy_mean && feedback_noise_var_ < 0.0) {
    throw std::invalid_argument("ContextualPrior: feedback noise variance must be nonnegative");
  }
}

double ContextualPrior::prior_mean(int arm, int context) const {
  return cell(arm, context).prior_mean() -
         (correlation_ == Correlation::offset ? offsets_[static_cast<std::size_t>(arm)] : 0.0);
}

const ArmMarginal& ContextualPrior::cell(int arm, int context) const {
  if (arm < 0 || arm >= num_arms_ || context < 0 || context >= num_contexts()) {
    throw std::out_of_range("ContextualPrior: bad arm or context");
  }
  if (correlation_ == Correlation::offset) {
    return cells_[static_cast<std::size_t>(context)];
  }
  return cells_[static_cast<std::size_t>(arm) * static_cast<std::size_t>(num_contexts()) +
                static_cast<std::size_t>(context)];
}

const RewardFamily& ContextualPrior::reward(int arm) const {
  return rewards_.at(static_cast<std::size_t>(arm));
}

std::vector<double> ContextualPrior::sample_matrix(RngStream& rng) const {
  const std::size_t contexts_n = static_cast<std::size_t>(num_contexts());
  std::vector<double> matrix(static_cast<std::size_t>(num_arms_) * contexts_n);
  if (correlation_ == Correlation::offset) {
    for (std::size_t x = 0; x < contexts_n; ++x) {
      const double base = sample_marginal(cells_[x], rng);
      for (int a = 0; a < num_arms_; ++a) {
        matrix[static_cast<std::size_t>(a) * contexts_n + x] =
            base - offsets_[static_cast<std::size_t>(a)];
      }
    }
    return matrix;
  }
  for (std::size_t c = 0; c < matrix.size(); ++c) matrix[c] = sample_marginal(cells_[c], rng);
  return matrix;
}

int ContextualPrior::sample_context(RngStream& rng) const {
  if (num_contexts() == 1) return 0;
  const double u = rng.uniform();
  const auto it = std::upper_bound(cum_weights_.begin(), cum_weights_.end(), u);
  const std::size_t x = it == cum_weights_.end() ? cum_weights_.size() - 1
                                                 : static_cast<std::size_t>(it - cum_weights_.begin());
  return static_cast<int>(x);
}

std::vector<int> arm_rank(const ContextualPrior& prior, int context) {
  if (context < 0 || context >= prior.num_contexts()) {
    throw std::out_of_range("arm_rank: unknown context");
  }
  std::vector<int> order(static_cast<std::size_t>(prior.num_arms()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return prior.prior_mean(a, context) > prior.prior_mean(b, context);
  });
  return order;
}

ContextualEnvironment make_contextual_environment(const ContextualPrior& prior,
                                                  RngStream& instance_rng) {
  ContextualEnvironment env;
  env.means = prior.sample_matrix(instance_rng);
  env.rewards = prior.rewards();
  env.arms = prior.num_arms();
  env.contexts = prior.num_contexts();
  return env;
}

double contextual_posterior_mean(const ContextualPrior& prior, const ContextualDataset& data,
                                 int arm, int context, const PosteriorOptions& opts) {
  check_dataset_shape(prior, data);
  if (arm < 0 || arm >= prior.num_arms() || context < 0 || context >= prior.num_contexts()) {
    throw std::out_of_range("contextual_posterior_mean: bad arm or context");
  }
  return PosteriorBackend(prior).mean(data, arm, context, opts);
}

int contextual_exploit_arm(const ContextualPrior& prior, const ContextualDataset& data,
                           int context, const PosteriorOptions& opts) {
  check_dataset_shape(prior, data);
  if (context < 0 || context >= prior.num_contexts()) {
    throw std::out_of_range("contextual_exploit_arm: bad context");
  }
  return PosteriorBackend(prior).exploit(data, context, opts);
}

ContextualReductionRun run_contextual_reduction(const ContextualPrior& prior,
                                                const ContextualReductionConfig& cfg,
                                                const ContextualFactory& make_algo,
                                                const ContextualEnvironment& env,
                                                std::uint64_t root_seed, std::uint64_t replicate,
                                                const RunOptions& opts) {
  const int m = prior.num_arms();
  const int contexts_n = prior.num_contexts();
  if (env.arms != m || env.contexts != contexts_n) {
    throw std::invalid_argument("run_contextual_reduction: environment shape mismatch");
  }
  if (cfg.k < 1 || cfg.L < 1) {
    throw std::invalid_argument("run_contextual_reduction: k and L must be positive");
  }
  const std::int64_t c = static_cast<std::int64_t>(m) * cfg.L * cfg.k + cfg.k;
  if (cfg.T < c) {
    throw std::invalid_argument("run_contextual_reduction: T is below the sampling-stage length");
  }

  ContextualReductionRun run;
  run.sampling_rounds = c;
  run.transcript.root_seed = root_seed;
  run.transcript.replicate = replicate;
  run.transcript.num_contexts = contexts_n;
  run.transcript.means = env.means;
  run.samples = ContextualDataset(m, contexts_n);

  std::vector<std::vector<int>> ranks(static_cast<std::size_t>(contexts_n));
  for (int x = 0; x < contexts_n; ++x) ranks[static_cast<std::size_t>(x)] = arm_rank(prior, x);

  const PosteriorBackend backend(prior);
  const PosteriorOptions post_opts;
  RngStream ctx_rng = RngStream::derive(root_seed, replicate, "ctx", 0);
  auto next_context = [&]() { return prior.sample_context(ctx_rng); };

  const bool fb_active = prior.feedback() != FeedbackKind::none;
  RngStream fb_rng = RngStream::derive(root_seed, replicate, "fb-rw", 0);
  auto draw_feedback = [&](int arm, int x) -> std::optional<std::string> {
    if (!fb_active) return std::nullopt;
    const double obs =
        env.mean_of(arm, x) + fb_rng.normal(0.0, std::sqrt(prior.feedback_noise_var()));
    return format_double(obs);
  };
  auto exploit_table = [&]() {
    std::vector<int> table(static_cast<std::size_t>(contexts_n));
    for (int x = 0; x < contexts_n; ++x) {
      table[static_cast<std::size_t>(x)] = backend.exploit(run.samples, x, post_opts);
    }
    return table;
  };

  std::int64_t round = 0;
  const std::uint16_t init_role = run.transcript.role_id("init");
  RngStream init_rw = RngStream::derive(root_seed, replicate, "init-rw", 0);
  for (std::int64_t t = 0; t < cfg.k; ++t) {
    const int x = next_context();
    const int arm = ranks[static_cast<std::size_t>(x)][0];
    const double reward = env.draw(arm, x, init_rw);
    run.samples.add(arm, x, reward);
    run.transcript.rows.push_back(
        TranscriptRow{++round, x, arm, reward, init_role, draw_feedback(arm, x), {}});
  }

  const std::int64_t phase_len = cfg.L * cfg.k;
  for (int i = 2; i <= m; ++i) {
    const std::uint16_t role = run.transcript.role_id("explore:" + std::to_string(i));
    const std::vector<int> a_star = exploit_table();
    run.exploit_tables.push_back(a_star);
    RngStream q_rng =
        RngStream::derive(root_seed, replicate, "phase-q", static_cast<std::uint64_t>(i));
    const std::vector<int> dedicated =
        q_rng.subset(static_cast<int>(phase_len), static_cast<int>(cfg.k));
    RngStream phase_rw =
        RngStream::derive(root_seed, replicate, "phase-rw", static_cast<std::uint64_t>(i));
    std::size_t next_slot = 0;
    for (std::int64_t s = 0; s < phase_len; ++s) {
      const int x = next_context();
      const bool is_dedicated = next_slot < dedicated.size() && dedicated[next_slot] == s;
      const int arm =
          is_dedicated ? ranks[static_cast<std::size_t>(x)][static_cast<std::size_t>(i - 1)]
                       : a_star[static_cast<std::size_t>(x)];
      const double reward = env.draw(arm, x, phase_rw);
      run.transcript.rows.push_back(
          TranscriptRow{++round, x, arm, reward, role, draw_feedback(arm, x), {}});
      if (is_dedicated) {
        run.samples.add(arm, x, reward);
        run.dedicated_rounds.push_back(round);
        next_slot += 1;
      }
    }
  }

  {
    const std::uint16_t pad_role = run.transcript.role_id("pad");
    const std::vector<int> a_star = exploit_table();
    run.exploit_tables.push_back(a_star);
    RngStream pad_rw = RngStream::derive(root_seed, replicate, "pad-rw", 0);
    for (std::int64_t s = 0; s < phase_len; ++s) {
      const int x = next_context();
      const int arm = a_star[static_cast<std::size_t>(x)];
      const double reward = env.draw(arm, x, pad_rw);
      run.transcript.rows.push_back(
          TranscriptRow{++round, x, arm, reward, pad_role, draw_feedback(arm, x), {}});
    }
  }

  if (opts.record_predictions) {
    for (TranscriptRow& row : run.transcript.rows) row.prediction = kNullPrediction;
  }

  ContextualProtocolChecked algo(make_algo(RngStream::derive(root_seed, replicate, "algo", 0)));
  const std::uint16_t sim_role = run.transcript.role_id("sim");
  std::int64_t phase = 0;
  while (round < cfg.T) {
    ++phase;
    const std::int64_t len = std::min(cfg.L, cfg.T - round);
    const std::vector<int> a_star = exploit_table();
    run.exploit_tables.push_back(a_star);

    if (len < cfg.L) {
      RngStream sim_rng =
          RngStream::derive(root_seed, replicate, "sim-rw", static_cast<std::uint64_t>(phase));
      for (std::int64_t pos = 0; pos < len; ++pos) {
        const int x = next_context();
        const int arm = a_star[static_cast<std::size_t>(x)];
        const double reward = env.draw(arm, x, sim_rng);
        run.samples.add(arm, x, reward);
        run.transcript.rows.push_back(
            TranscriptRow{++round, x, arm, reward, sim_role, draw_feedback(arm, x), {}});
        if (opts.record_predictions && round <= c + cfg.L) {
          run.transcript.rows.back().prediction = kNullPrediction;
        }
      }
      break;
    }

    const std::uint64_t slot =
        RngStream::derive(root_seed, replicate, "ded", static_cast<std::uint64_t>(phase))
            .below(static_cast<std::uint64_t>(cfg.L));
    RngStream sim_rng =
        RngStream::derive(root_seed, replicate, "sim-rw", static_cast<std::uint64_t>(phase));

    int wrapped = -1;
    int wrapped_context = 0;
    double dedicated_reward = 0.0;
    std::optional<std::string> dedicated_feedback;
    const std::size_t first_row = run.transcript.rows.size();
    for (std::int64_t pos = 0; pos < cfg.L; ++pos) {
      const int x = next_context();
      int play;
      double reward;
      std::optional<std::string> fb;
      if (static_cast<std::uint64_t>(pos) == slot) {
        wrapped = algo.next_arm(x);
        if (wrapped < 0 || wrapped >= m) {
          throw std::logic_error("run_contextual_reduction: wrapped algorithm returned a bad arm");
        }
        wrapped_context = x;
        RngStream ded_rng = RngStream::derive(root_seed, replicate, "wrapped-rw",
                                              static_cast<std::uint64_t>(phase));
        play = wrapped;
        reward = env.draw(play, x, ded_rng);
        fb = draw_feedback(play, x);
        dedicated_reward = reward;
        dedicated_feedback = fb;
        run.dedicated_rounds.push_back(round + pos + 1);
      } else {
        play = a_star[static_cast<std::size_t>(x)];
        reward = env.draw(play, x, sim_rng);
        fb = draw_feedback(play, x);
      }
      run.samples.add(play, x, reward);
      run.transcript.rows.push_back(
          TranscriptRow{round + pos + 1, x, play, reward, sim_role, std::move(fb), {}});
    }
    round += cfg.L;
    run.wrapped_arms.push_back(wrapped);

    algo.observe(wrapped_context, wrapped, dedicated_reward, dedicated_feedback);
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

ContextualPersuasionConstants estimate_contextual_persuasion(const ContextualPrior& prior,
                                                             std::int64_t k, int replicates,
                                                             double ci_level,
                                                             std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("estimate_contextual_persuasion: k must be >= 1");
  if (replicates < 1000) {
    throw std::invalid_argument("estimate_contextual_persuasion: replicates must be >= 1000");
  }
  const int m = prior.num_arms();
  const int contexts_n = prior.num_contexts();
  const std::vector<double> grid = tau_grid();
  const int grid_n = static_cast<int>(grid.size());

  std::vector<std::vector<int>> ranks(static_cast<std::size_t>(contexts_n));
  for (int x = 0; x < contexts_n; ++x) ranks[static_cast<std::size_t>(x)] = arm_rank(prior, x);
  const PosteriorBackend backend(prior);
  const PosteriorOptions post_opts;

  // Comparator ranks per rank i (1-based): j in {i-1, m} minus i itself;
  // rank 1 is reported against rank m but never gates.
  std::vector<std::pair<int, int>> pair_index;
  for (int i = 1; i <= m; ++i) {
    if (i == 1) {
      pair_index.emplace_back(1, m);
      continue;
    }
    pair_index.emplace_back(i, i - 1);
    if (m != i && m != i - 1) pair_index.emplace_back(i, m);
  }
  const std::size_t num_pairs = pair_index.size();

  struct Acc {
    std::vector<double> sum;
    std::vector<double> sum2;
  };
  auto build = [&](std::int64_t lo, std::int64_t hi) {
    Acc acc;
    acc.sum.assign(num_pairs * static_cast<std::size_t>(grid_n), 0.0);
    acc.sum2.assign(num_pairs * static_cast<std::size_t>(grid_n), 0.0);
    std::vector<double> post(static_cast<std::size_t>(m));
    for (std::int64_t r = lo; r < hi; ++r) {
      RngStream rng = RngStream::derive(seed, static_cast<std::uint64_t>(r), "persuasion", 0);
      const std::vector<double> matrix = prior.sample_matrix(rng);
      ContextualDataset data(m, contexts_n);
      std::vector<double> hits(num_pairs * static_cast<std::size_t>(grid_n), 0.0);
      std::size_t pair_at = 0;
      for (int i = 1; i <= m; ++i) {
        const std::size_t pair_lo = pair_at;
        while (pair_at < num_pairs && pair_index[pair_at].first == i) ++pair_at;
        for (int x = 0; x < contexts_n; ++x) {
          const double w = prior.contexts().weights[static_cast<std::size_t>(x)];
          const std::vector<int>& rank = ranks[static_cast<std::size_t>(x)];
          for (std::size_t p = pair_lo; p < pair_at; ++p) {
            const int arm_i = rank[static_cast<std::size_t>(pair_index[p].first - 1)];
            const int arm_j = rank[static_cast<std::size_t>(pair_index[p].second - 1)];
            const double diff = backend.mean(data, arm_i, x, post_opts) -
                                backend.mean(data, arm_j, x, post_opts);
            for (int g = 0; g < grid_n; ++g) {
              if (diff > grid[static_cast<std::size_t>(g)]) {
                hits[p * static_cast<std::size_t>(grid_n) + static_cast<std::size_t>(g)] += w;
              }
            }
          }
        }
        if (i < m) {
          for (std::int64_t s = 0; s < k; ++s) {
            const int x = prior.sample_context(rng);
            const int arm = ranks[static_cast<std::size_t>(x)][static_cast<std::size_t>(i - 1)];
            const double reward =
                draw_reward(prior.reward(arm),
                            matrix[static_cast<std::size_t>(arm) *
                                       static_cast<std::size_t>(contexts_n) +
                                   static_cast<std::size_t>(x)],
                            rng);
            data.add(arm, x, reward);
          }
        }
      }
      for (std::size_t t = 0; t < hits.size(); ++t) {
        acc.sum[t] += hits[t];
        acc.sum2[t] += hits[t] * hits[t];
      }
    }
    return acc;
  };
  auto merge = [](Acc& into, Acc&& part) {
    if (into.sum.empty()) {
      into = std::move(part);
      return;
    }
    for (std::size_t t = 0; t < into.sum.size(); ++t) {
      into.sum[t] += part.sum[t];
      into.sum2[t] += part.sum2[t];
    }
  };
  const Acc acc = parallel_reduce<Acc>(replicates, build, merge);

  const double z = z_for_confidence(ci_level);
  const double n = static_cast<double>(replicates);
  ContextualPersuasionConstants out;
  out.k_p = k;
  out.replicates = replicates;
  out.ci_level = ci_level;
  out.tau_p = std::numeric_limits<double>::infinity();
  out.rho_p = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < num_pairs; ++p) {
    RankPairPersuasion row;
    row.rank = pair_index[p].first;
    row.comparator = pair_index[p].second;
    row.curve.resize(static_cast<std::size_t>(grid_n));
    double best_score = 0.0;
    double max_ucb = 0.0;
    for (int g = 0; g < grid_n; ++g) {
      const std::size_t t = p * static_cast<std::size_t>(grid_n) + static_cast<std::size_t>(g);
      TauGridPoint& pt = row.curve[static_cast<std::size_t>(g)];
      pt.tau = grid[static_cast<std::size_t>(g)];
      pt.rho_hat = acc.sum[t] / n;
      double se = 0.0;
      if (replicates > 1) {
        const double var =
            std::max(0.0, (acc.sum2[t] - n * pt.rho_hat * pt.rho_hat) / (n - 1.0));
        se = std::sqrt(var / n);
      }
      pt.rho_lcb = std::max(0.0, pt.rho_hat - z * se);
      pt.rho_ucb = std::min(1.0, pt.rho_hat + z * se);
      max_ucb = std::max(max_ucb, pt.rho_ucb);
      const double score = pt.tau * pt.rho_lcb;
      if (pt.rho_lcb > 0.0 && score > best_score) {
        best_score = score;
        row.feasible = true;
        row.tau_star = pt.tau;
        row.rho_point = pt.rho_hat;
        row.rho_lcb = pt.rho_lcb;
      }
    }
    if (row.rank >= 2) {
      if (!row.feasible) {
        const std::string which = "rank " + std::to_string(row.rank) + " against rank " +
                                  std::to_string(row.comparator);
        if (max_ucb < 1e-4) {
          throw PriorNotPersuadable(which + " has vanishing exceedance probability");
        }
        throw PriorNotPersuadable(which + " exceedance is inconclusive at this replicate budget");
      }
      out.tau_p = std::min(out.tau_p, row.tau_star);
      out.rho_p = std::min(out.rho_p, row.rho_lcb);
    }
    out.pairs.push_back(std::move(row));
  }

  double max_gap = 0.0;
  for (int x = 0; x < contexts_n; ++x) {
    double lo = prior.prior_mean(0, x);
    double hi = lo;
    for (int a = 1; a < m; ++a) {
      const double v = prior.prior_mean(a, x);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    max_gap = std::max(max_gap, hi - lo);
  }
  out.l_p = 1.0 + max_gap / (out.tau_p * out.rho_p);
  return out;
}

RegretCurve contextual_regret(const std::vector<Transcript>& transcripts,
                              const ContextualPrior& prior, const PolicyClass& policies) {
  if (transcripts.empty()) throw std::invalid_argument("contextual_regret needs transcripts");
  if (policies.empty()) throw std::invalid_argument("contextual_regret needs a policy class");
  const int contexts_n = prior.num_contexts();
  const int m = prior.num_arms();
  for (const Policy& pi : policies) {
    if (static_cast<int>(pi.size()) != contexts_n) {
      throw std::invalid_argument("contextual_regret: policy not total over the context space");
    }
    for (const int a : pi) {
      if (a < 0 || a >= m) throw std::invalid_argument("contextual_regret: policy arm out of range");
    }
  }
  const std::size_t horizon = transcripts.front().rows.size();
  for (const Transcript& t : transcripts) {
    if (t.rows.size() != horizon) {
      throw std::invalid_argument("contextual_regret transcripts must share the horizon");
    }
    if (t.num_arms() != m || std::max(t.num_contexts, 1) != contexts_n) {
      throw std::invalid_argument("contextual_regret: transcript shape does not match the prior");
    }
  }

  std::vector<double> sum(horizon, 0.0);
  std::vector<double> sum2(horizon, 0.0);
  for (const Transcript& t : transcripts) {
    double benchmark = -std::numeric_limits<double>::infinity();
    for (const Policy& pi : policies) {
      double value = 0.0;
      for (int x = 0; x < contexts_n; ++x) {
        value += prior.contexts().weights[static_cast<std::size_t>(x)] *
                 t.mean_of(pi[static_cast<std::size_t>(x)], x);
      }
      benchmark = std::max(benchmark, value);
    }
    double played = 0.0;
    for (std::size_t s = 0; s < horizon; ++s) {
      const TranscriptRow& row = t.rows[s];
      played += t.mean_of(row.arm, row.context);
      const double regret = benchmark * static_cast<double>(s + 1) - played;
      sum[s] += regret;
      sum2[s] += regret * regret;
    }
  }

  RegretCurve curve;
  curve.replicates = static_cast<int>(transcripts.size());
  curve.ci_level = 0.95;
  const double n = static_cast<double>(transcripts.size());
  const double z = z_for_confidence(curve.ci_level);
  curve.points.resize(horizon);
  for (std::size_t s = 0; s < horizon; ++s) {
    const double mean = sum[s] / n;
    double se = 0.0;
    if (transcripts.size() > 1) {
      const double var = std::max(0.0, (sum2[s] - n * mean * mean) / (n - 1.0));
      se = std::sqrt(var / n);
    }
    curve.points[s] = {static_cast<std::int64_t>(s) + 1, mean, mean - z * se, mean + z * se};
  }
  return curve;
}

}  // namespace bicex
