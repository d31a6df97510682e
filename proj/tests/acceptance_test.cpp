#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "bicex/audit.hpp"
#include "bicex/baselines.hpp"
#include "bicex/bic.hpp"
#include "bicex/config.hpp"
#include "bicex/constants.hpp"
#include "bicex/contextual.hpp"
#include "bicex/detail_free.hpp"
#include "bicex/environment.hpp"
#include "bicex/metrics.hpp"
#include "bicex/model.hpp"
#include "bicex/priors.hpp"
#include "bicex/rng.hpp"
#include "cli.hpp"

using namespace bicex;
namespace fs = std::filesystem;

namespace {

const char* kGaussianPrior = R"({
  "arms": [{"kind": "gaussian", "mean": 1.0, "variance": 1.0},
           {"kind": "gaussian", "mean": 0.5, "variance": 1.0}],
  "rewards": [{"kind": "gaussian", "noise_var": 1.0}, {"kind": "gaussian", "noise_var": 1.0}]
})";

const char* kBetaTwoArm = R"({
  "arms": [{"kind": "beta", "alpha": 4, "beta": 2}, {"kind": "beta", "alpha": 2, "beta": 2}],
  "rewards": [{"kind": "bernoulli"}, {"kind": "bernoulli"}]
})";

const char* kBetaThreeArm = R"({
  "arms": [{"kind": "beta", "alpha": 4, "beta": 2}, {"kind": "beta", "alpha": 3, "beta": 3},
           {"kind": "beta", "alpha": 2, "beta": 2}],
  "rewards": [{"kind": "bernoulli"}, {"kind": "bernoulli"}, {"kind": "bernoulli"}]
})";

const char* kOffsetPrior = R"({
  "arms": [{"kind": "gaussian", "mean": 1.0, "variance": 1.0}],
  "rewards": [{"kind": "gaussian", "noise_var": 1.0}, {"kind": "gaussian", "noise_var": 1.0}],
  "correlation": "offset",
  "offsets": [0.0, 0.2]
})";

const char* kCtxPrior = R"({
  "contexts": {"weights": [0.5, 0.5]},
  "cells": [{"kind": "beta", "alpha": 4, "beta": 2}, {"kind": "beta", "alpha": 2, "beta": 4},
            {"kind": "beta", "alpha": 3, "beta": 3}, {"kind": "beta", "alpha": 4, "beta": 2}],
  "rewards": [{"kind": "bernoulli"}, {"kind": "bernoulli"}]
})";

double seconds_since(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
};

MeanSd mean_sd(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

WrappedFactory ucb1_factory(int num_arms, std::int64_t horizon) {
  BanditSetup setup;
  setup.num_arms = num_arms;
  setup.horizon = horizon;
  return [setup](RngStream) { return make_bandit("ucb1", setup); };
}

struct CliCapture {
  int code = 0;
  std::string out;
};

CliCapture run_cli_quiet(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  std::streambuf* old_out = std::cout.rdbuf(out.rdbuf());
  std::streambuf* old_err = std::cerr.rdbuf(err.rdbuf());
  CliCapture result;
  try {
    result.code = cli_main(args);
  } catch (...) {
    std::cout.rdbuf(old_out);
    std::cerr.rdbuf(old_err);
    throw;
  }
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  result.out = out.str();
  return result;
}

fs::path fresh_dir(const std::string& leaf) {
  const fs::path dir = fs::temp_directory_path() / ("bicex_acceptance_" + leaf);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_file(const fs::path& dir, const std::string& name, const std::string& text) {
  const fs::path path = dir / name;
  std::ofstream out(path, std::ios::binary);
  out << text;
  return path;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::map<std::string, std::string> dir_signature(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const fs::directory_entry& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file())
      files[fs::relative(entry.path(), root).generic_string()] = slurp(entry.path());
  }
  return files;
}

bool criterion1() {
  const auto start = std::chrono::steady_clock::now();
  const PriorModel prior = parse_prior(kGaussianPrior);
  const int draws = 100000;
  bool ok = true;
  std::ostringstream note;
  for (const std::int64_t k : {std::int64_t{1}, std::int64_t{4}, std::int64_t{16}}) {
    const XkDistribution ref = xk_distribution(prior, k);
    const double want_var = static_cast<double>(k) / (1.0 + static_cast<double>(k));
    ok = ok && std::abs(ref.mean + 0.5) < 1e-12 && std::abs(ref.variance - want_var) < 1e-12;
    double sum = 0.0;
    double sum2 = 0.0;
    for (int rep = 0; rep < draws; ++rep) {
      RngStream rng = RngStream::derive(9001, static_cast<std::uint64_t>(rep), "xk",
                                        static_cast<std::uint64_t>(k));
      const MabInstance inst = sample_instance(prior, rng);
      Environment env{inst, prior.rewards()};
      Dataset data(prior.num_arms());
      for (std::int64_t j = 0; j < k; ++j) data.add(0, env.draw(0, rng));
      const double x = posterior_mean(prior, data, 1) - posterior_mean(prior, data, 0);
      sum += x;
      sum2 += x * x;
    }
    const double mean = sum / draws;
    const double var = (sum2 - draws * mean * mean) / (draws - 1.0);
    const double se_mean = std::sqrt(ref.variance / draws);
    const double se_var = ref.variance * std::sqrt(2.0 / (draws - 1.0));
    const bool mean_ok = std::abs(mean - ref.mean) <= 3.0 * se_mean;
    const bool var_ok = std::abs(var - ref.variance) <= 3.0 * se_var;
    ok = ok && mean_ok && var_ok;
    note << " k=" << k << " mean=" << mean << " var=" << var << ";";
  }
  const double secs = seconds_since(start);
  ok = ok && secs < 30.0;
  std::cout << "criterion 1: " << (ok ? "PASS" : "FAIL") << " (X^k moments vs N(-0.5, k/(1+k)):"
            << note.str() << " elapsed " << secs << "s)" << std::endl;
  return ok;
}

bool criterion2() {
  const auto start = std::chrono::steady_clock::now();
  const PriorModel prior = parse_prior(kGaussianPrior);
  const std::int64_t L_two = min_phase_length_two_arm(prior, 1, 20000);
  const PersuasionConstants constants = estimate_persuasion_constants(prior, 1, 20000);
  const std::int64_t L_m = min_phase_length_m_arm(prior, constants, 20000);
  AuditOptions opts;
  opts.epsilon = 0.01;
  opts.threads = 1;
  const int replicates = 100000;
  const RunOptions quiet{false};

  const TranscriptRunner two_arm = [&](std::uint64_t rep) {
    RngStream inst = RngStream::derive(31, rep, "instance", 0);
    Environment env = make_environment(prior, inst);
    return run_two_arm_sampler(prior, {1, L_two}, env, 31, rep, quiet).transcript;
  };
  const AuditReport two_report = audit_bic(two_arm, replicates, opts);

  const TranscriptRunner m_arm = [&](std::uint64_t rep) {
    RngStream inst = RngStream::derive(32, rep, "instance", 0);
    Environment env = make_environment(prior, inst);
    return run_m_arm_sampler(prior, {1, L_m}, env, 32, rep, quiet).transcript;
  };
  const AuditReport m_report = audit_bic(m_arm, replicates, opts);

  const std::int64_t T = 400;
  const WrappedFactory factory = ucb1_factory(prior.num_arms(), T);
  const TranscriptRunner reduction = [&](std::uint64_t rep) {
    RngStream inst = RngStream::derive(33, rep, "instance", 0);
    Environment env = make_environment(prior, inst);
    return run_black_box_reduction(prior, {1, L_m, T}, factory, env, 33, rep, quiet).transcript;
  };
  const AuditReport red_report = audit_bic(reduction, replicates, opts);

  const double secs = seconds_since(start);
  const bool ok = L_two == 7 && two_report.pass && m_report.pass && red_report.pass &&
                  secs < 600.0;
  std::cout << "criterion 2: " << (ok ? "PASS" : "FAIL") << " (two-arm L=" << L_two
            << " verdict " << (two_report.pass ? "PASS" : "FAIL") << ", m-arm L=" << L_m
            << " verdict " << (m_report.pass ? "PASS" : "FAIL") << ", reduction T=" << T
            << " verdict " << (red_report.pass ? "PASS" : "FAIL") << ", elapsed " << secs
            << "s)" << std::endl;
  return ok;
}

bool criterion3() {
  const PriorModel prior = parse_prior(kOffsetPrior);
  BanditSetup setup;
  setup.num_arms = prior.num_arms();
  const WrappedFactory factory = [setup](RngStream) { return make_bandit("constant:2", setup); };
  const TranscriptRunner runner = [&](std::uint64_t rep) {
    RngStream inst = RngStream::derive(17, rep, "instance", 0);
    Environment env = make_environment(prior, inst);
    return run_standalone_bandit(env, factory, 4, 17, rep).transcript;
  };
  AuditOptions opts;
  opts.epsilon = 0.01;
  opts.threads = 1;
  const AuditReport report = audit_bic(runner, 2000, opts);

  bool found = false;
  double slack = 0.0;
  for (const AuditCell& cell : report.cells) {
    if (cell.role == "play" && cell.recommended == 1 && cell.competitor == 0) {
      found = true;
      slack = cell.slack;
    }
  }
  const bool ok = found && !report.pass && std::abs(slack + 0.2) <= 0.01;
  std::cout << "criterion 3: " << (ok ? "PASS" : "FAIL")
            << " (offset prior arm-2 cell slack=" << slack << ", verdict "
            << (report.pass ? "PASS" : "FAIL") << " with FAIL required)" << std::endl;
  return ok;
}

bool criterion4() {
  const auto start = std::chrono::steady_clock::now();
  const int reps = 1000;
  const std::int64_t T = 10000;
  const double theta = 100.0;

  const Environment two_env{MabInstance{{0.7, 0.5}}, std::vector<RewardFamily>(2)};
  const WrappedFactory aae = [&](RngStream) {
    return make_active_arms_elimination(2, T, theta);
  };
  double total_two = 0.0;
  for (int rep = 0; rep < reps; ++rep) {
    Environment env = two_env;
    total_two += expost_regret(
        run_standalone_bandit(env, aae, T, 101, static_cast<std::uint64_t>(rep)).transcript);
  }
  const double mean_two = total_two / reps;
  const double bound_two = 8.0 * std::log(static_cast<double>(T) * theta) / 0.2;
  const double secs_two = seconds_since(start);

  const Environment race_env{MabInstance{{0.7, 0.5, 0.3}}, std::vector<RewardFamily>(3)};
  double total_race = 0.0;
  for (int rep = 0; rep < reps; ++rep) {
    Environment env = race_env;
    Dataset warm(3);
    for (int arm = 0; arm < 3; ++arm) {
      RngStream rng = RngStream::derive(202, static_cast<std::uint64_t>(rep), "warm",
                                        static_cast<std::uint64_t>(arm));
      warm.add(arm, env.draw(arm, rng));
    }
    DfRaceConfig cfg;
    cfg.k = 1;
    cfg.theta = theta;
    cfg.T = T;
    cfg.rounds = T;
    total_race += expost_regret(
        run_df_race_m(warm, cfg, env, 202, static_cast<std::uint64_t>(rep)).transcript);
  }
  const double mean_race = total_race / reps;
  const double log_tt = std::log(static_cast<double>(T) * theta);
  const double bound_race = 18.0 * log_tt * (1.0 / 0.2 + 1.0 / 0.4);
  const double secs = seconds_since(start);

  const bool ok = mean_two <= bound_two && mean_race <= bound_race && secs_two < 300.0 &&
                  (secs - secs_two) < 300.0;
  std::cout << "criterion 4: " << (ok ? "PASS" : "FAIL") << " (two-arm regret " << mean_two
            << " <= " << bound_two << ", three-arm race regret " << mean_race << " <= "
            << bound_race << ", elapsed " << secs << "s)" << std::endl;
  return ok;
}

bool criterion5() {
  const PriorModel prior({ArmMarginal::point_prior(0.51), ArmMarginal::point_prior(0.49)},
                         std::vector<RewardFamily>(2));
  const std::vector<double> prior_means = {0.51, 0.49};
  const int reps = 1000;
  const std::int64_t N = 10;
  const double f = static_cast<double>(N + N * N);
  std::map<std::int64_t, double> regret;
  for (const std::int64_t T : {std::int64_t{2500}, std::int64_t{10000}}) {
    double total = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
      RngStream inst = RngStream::derive(55, static_cast<std::uint64_t>(rep), "instance", 0);
      Environment env = make_environment(prior, inst);
      DetailFreeConfig cfg;
      cfg.mu_hat = 0.49;
      cfg.N = N;
      cfg.T = T;
      total += expost_regret(
          run_detail_free(cfg, env, prior_means, 55, static_cast<std::uint64_t>(rep))
              .transcript);
    }
    regret[T] = total / reps;
  }
  const double ratio = regret[10000] / regret[2500];
  bool bounds_ok = true;
  for (const auto& [T, r] : regret) {
    const double cap =
        std::min(2.0 * f, std::sqrt(18.0 * static_cast<double>(T) *
                                    std::log(static_cast<double>(T * N))));
    bounds_ok = bounds_ok && r <= cap;
  }
  const bool ok = ratio <= 2.4 && bounds_ok;
  std::cout << "criterion 5: " << (ok ? "PASS" : "FAIL") << " (R(2500)=" << regret[2500]
            << ", R(10000)=" << regret[10000] << ", ratio " << ratio
            << " with <= 2.4 required; regret caps " << (bounds_ok ? "hold" : "violated")
            << ")" << std::endl;
  return ok;
}

bool criterion6() {
  const auto start = std::chrono::steady_clock::now();
  const int cells = 41;
  const auto truncated_weights = [&](double mu) {
    std::vector<double> w(static_cast<std::size_t>(cells));
    for (int j = 0; j < cells; ++j) {
      const double x = (j + 0.5) / cells;
      w[static_cast<std::size_t>(j)] = std::exp(-0.5 * (x - mu) * (x - mu));
    }
    return w;
  };
  const PriorModel prior(
      {ArmMarginal::grid_prior(0.0, 1.0, cells, truncated_weights(1.0)),
       ArmMarginal::grid_prior(0.0, 1.0, cells, truncated_weights(0.5))},
      std::vector<RewardFamily>(2));

  const PersuasionConstants constants = estimate_persuasion_constants(prior, 1, 20000);
  const std::int64_t L = min_phase_length_m_arm(prior, constants, 20000);
  if (L < 1 || L > 450) {
    std::cout << "criterion 6: FAIL (estimated phase length " << L
              << " leaves no comparison window)" << std::endl;
    return false;
  }
  const std::int64_t T = 5000;
  const std::int64_t c = 1 + L;
  const std::int64_t horizon_a = 2000 / L;
  const WrappedFactory factory = ucb1_factory(prior.num_arms(), T);
  const RunOptions quiet{false};

  const int reps = 10000;
  std::vector<double> d500(reps);
  std::vector<double> d2000(reps);
  for (int rep = 0; rep < reps; ++rep) {
    const auto r = static_cast<std::uint64_t>(rep);
    RngStream inst = RngStream::derive(66, r, "instance", 0);
    Environment env = make_environment(prior, inst);
    Environment env_a = env;
    ReductionRun red = run_black_box_reduction(prior, {1, L, T}, factory, env, 66, r, quiet);
    StandaloneRun alg = run_standalone_bandit(env_a, factory, horizon_a, 66, r);
    std::vector<Transcript> red_t;
    red_t.push_back(std::move(red.transcript));
    std::vector<Transcript> alg_t;
    alg_t.push_back(std::move(alg.transcript));
    const double ic500 = avg_reward_window(red_t, c + 1, c + 500);
    const double ic2000 = avg_reward_window(red_t, c + 1, c + 2000);
    const double a500 = avg_reward_window(alg_t, 1, std::max<std::int64_t>(1, 500 / L));
    const double a2000 = avg_reward_window(alg_t, 1, horizon_a);
    d500[static_cast<std::size_t>(rep)] = ic500 - a500;
    d2000[static_cast<std::size_t>(rep)] = ic2000 - a2000;
  }
  const MeanSd s500 = mean_sd(d500);
  const MeanSd s2000 = mean_sd(d2000);
  const double root_n = std::sqrt(static_cast<double>(reps));
  const bool ok500 = s500.mean >= -3.0 * s500.sd / root_n;
  const bool ok2000 = s2000.mean >= -3.0 * s2000.sd / root_n;
  const double secs = seconds_since(start);
  const bool ok = ok500 && ok2000;
  std::cout << "criterion 6: " << (ok ? "PASS" : "FAIL") << " (L=" << L
            << "; window diff tau=500: " << s500.mean << " +- " << s500.sd / root_n
            << ", tau=2000: " << s2000.mean << " +- " << s2000.sd / root_n << ", elapsed "
            << secs << "s)" << std::endl;
  return ok;
}

bool criterion7() {
  const PriorModel prior = parse_prior(kGaussianPrior);
  const ContextualPrior ctx_prior = parse_contextual_prior(kCtxPrior);
  const PolicyClass policies = {{0, 0}, {1, 1}, {0, 1}, {1, 0}};
  const ContextualFactory ctx_factory = [&](RngStream rng) {
    return epsilon_greedy_policies(policies, 0.1, ctx_prior.num_arms(), std::move(rng));
  };
  int mismatches = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    RngStream inst = RngStream::derive(seed, 0, "instance", 0);
    Environment env = make_environment(prior, inst);
    const ReductionRun red =
        run_black_box_reduction(prior, {1, 3, 41}, ucb1_factory(2, 41), env, seed, 0);
    if (!check_prediction_coupling(red.transcript, red.phase_predictions, red.sampling_rounds,
                                   3))
      ++mismatches;

    RngStream ctx_inst = RngStream::derive(seed, 0, "instance", 0);
    const ContextualEnvironment ctx_env = make_contextual_environment(ctx_prior, ctx_inst);
    const ContextualReductionRun ctx_run =
        run_contextual_reduction(ctx_prior, {1, 2, 30}, ctx_factory, ctx_env, seed, 0);
    if (!check_prediction_coupling(ctx_run.transcript, ctx_run.phase_predictions,
                                   ctx_run.sampling_rounds, 2))
      ++mismatches;
  }
  const bool ok = mismatches == 0;
  std::cout << "criterion 7: " << (ok ? "PASS" : "FAIL") << " (" << mismatches
            << " coupling mismatches across 100 seeded runs of both reductions)" << std::endl;
  return ok;
}

bool criterion8() {
  const PriorModel two = parse_prior(kGaussianPrior);
  const PriorModel three = parse_prior(kBetaThreeArm);
  const PriorModel bounded = parse_prior(kBetaTwoArm);
  const ContextualPrior ctx_prior = parse_contextual_prior(kCtxPrior);
  bool ok = true;
  std::ostringstream note;

  for (const auto& [k, L] : std::vector<std::pair<std::int64_t, std::int64_t>>{
           {1, 7}, {3, 2}, {2, 5}}) {
    RngStream inst = RngStream::derive(81, 0, "instance", 0);
    Environment env = make_environment(two, inst);
    const SamplerRun run = run_two_arm_sampler(two, {k, L}, env, 81, 0);
    const auto want = static_cast<std::size_t>(std::max(k, L) + k * L);
    ok = ok && run.transcript.rows.size() == want &&
         run.dedicated_rounds.size() == static_cast<std::size_t>(k);
  }
  note << " two-arm max(k,L)+kL;";

  for (const auto& [k, L] : std::vector<std::pair<std::int64_t, std::int64_t>>{
           {1, 2}, {2, 3}}) {
    RngStream inst = RngStream::derive(82, 0, "instance", 0);
    Environment env = make_environment(three, inst);
    const SamplerRun run = run_m_arm_sampler(three, {k, L}, env, 82, 0);
    const auto want = static_cast<std::size_t>(k + 2 * L * k);
    ok = ok && run.transcript.rows.size() == want;
  }
  note << " m-arm k+(m-1)Lk;";

  {
    RngStream inst = RngStream::derive(83, 0, "instance", 0);
    Environment env = make_environment(two, inst);
    const ReductionRun run =
        run_black_box_reduction(two, {1, 3, 40}, ucb1_factory(2, 40), env, 83, 0);
    ok = ok && run.transcript.rows.size() == 40 && run.sampling_rounds == 1 + 3;
  }
  note << " reduction horizon;";

  const std::vector<double> means = {bounded.prior_mean(0), bounded.prior_mean(1)};
  for (const std::int64_t N : {std::int64_t{2}, std::int64_t{3}}) {
    RngStream inst = RngStream::derive(84, 0, "instance", 0);
    Environment env = make_environment(bounded, inst);
    DetailFreeConfig cfg;
    cfg.mu_hat = 0.5;
    cfg.N = N;
    cfg.T = 30;
    const DetailFreeRun run = run_detail_free(cfg, env, means, 84, 0);
    ok = ok && run.sampling_rounds == N + N * N && run.transcript.rows.size() == 30;
  }
  note << " detail-free f(N)=N+N^2(m-1);";

  {
    RngStream inst = RngStream::derive(85, 0, "instance", 0);
    const ContextualEnvironment env = make_contextual_environment(ctx_prior, inst);
    const PolicyClass policies = {{0, 0}, {1, 1}};
    const ContextualFactory factory = [&](RngStream rng) {
      return epsilon_greedy_policies(policies, 0.1, 2, std::move(rng));
    };
    const ContextualReductionRun run =
        run_contextual_reduction(ctx_prior, {2, 3, 20}, factory, env, 85, 0);
    ok = ok && run.sampling_rounds == 2 * 3 * 2 + 2 && run.transcript.rows.size() == 20;
  }
  note << " contextual c=mLk+k";

  std::cout << "criterion 8: " << (ok ? "PASS" : "FAIL") << " (round-count formulas:"
            << note.str() << ")" << std::endl;
  return ok;
}

bool criterion9() {
  DetailFreeInputs in;
  in.m = 2;
  in.mu_m0 = 0.5;
  in.mean_gap = 0.5;
  in.lambda = 0.5;
  in.prior_cdf_point = 0.125;
  in.T = 10000;
  in.tau = 0.2;
  in.racing_min_prob = 0.32;
  const DetailFreeThresholds thresholds = detail_free_thresholds(in);
  const std::int64_t chernoff = chernoff_required_k(0.25, 0.5, 0.5, 0.125);
  const bool ok = thresholds.k == chernoff && chernoff == 156;
  std::cout << "criterion 9: " << (ok ? "PASS" : "FAIL") << " (two-arm k*=" << thresholds.k
            << ", chernoff k=" << chernoff << ", both must equal 156)" << std::endl;
  return ok;
}

bool criterion10() {
  const fs::path dir = fresh_dir("c10");
  const fs::path gauss = write_file(dir, "gauss.json", kGaussianPrior);
  const fs::path beta = write_file(dir, "beta.json", kBetaTwoArm);
  const fs::path ctx = write_file(dir, "ctx.json", kCtxPrior);
  std::ostringstream cfg;
  cfg << "{\"seed\": 7, \"replicates\": 4, \"transcripts\": 1, \"horizon\": 4, "
      << "\"algorithm\": {\"kind\": \"standalone\", \"wrapped\": \"constant:2\"}, "
      << "\"prior\": " << kOffsetPrior << ", "
      << "\"audit\": {\"replicates\": 1000, \"epsilon\": 0.01, \"min_cell\": 100}}";
  const fs::path config = write_file(dir, "experiment.json", cfg.str());

  bool ok = true;
  std::ostringstream note;
  const auto repeatable = [&](const std::string& name, std::vector<std::string> args,
                              const std::vector<std::size_t>& out_slots) {
    std::vector<fs::path> first;
    std::vector<fs::path> second;
    for (std::size_t slot : out_slots) {
      first.push_back(dir / (name + "_a" + std::to_string(slot)));
      second.push_back(dir / (name + "_b" + std::to_string(slot)));
    }
    std::vector<std::string> args_a = args;
    std::vector<std::string> args_b = args;
    for (std::size_t i = 0; i < out_slots.size(); ++i) {
      args_a[out_slots[i]] = first[i].string();
      args_b[out_slots[i]] = second[i].string();
    }
    const CliCapture a = run_cli_quiet(args_a);
    const CliCapture b = run_cli_quiet(args_b);
    bool same = a.code == b.code;
    for (std::size_t i = 0; i < out_slots.size(); ++i)
      same = same && slurp(first[i]) == slurp(second[i]);
    ok = ok && same;
    note << " " << name << (same ? " ok" : " MISMATCH") << ";";
  };

  repeatable("constants",
             {"constants", "--prior", gauss.string(), "--k", "1", "--replicates", "2000",
              "--out", "X"},
             {8});
  repeatable("df-thresholds",
             {"df-thresholds", "--arms", "2", "--mu-m0", "0.5", "--mean-gap", "0.5",
              "--lambda", "0.5", "--event-prob", "0.125", "--T", "10000", "--out", "X"},
             {14});
  repeatable("run-bic",
             {"run-bic", "--prior", gauss.string(), "--k", "1", "--L", "7", "--out", "X",
              "--summary", "Y"},
             {8, 10});
  repeatable("run-df",
             {"run-df", "--prior", beta.string(), "--mu-hat", "0.5", "--N", "2", "--T", "12",
              "--out", "X", "--summary", "Y"},
             {10, 12});
  repeatable("run-ctx",
             {"run-ctx", "--prior", ctx.string(), "--k", "1", "--L", "2", "--T", "12",
              "--out", "X", "--summary", "Y"},
             {10, 12});
  repeatable("audit",
             {"audit", "--config", config.string(), "--threads", "1", "--out", "X"}, {6});
  repeatable("regret",
             {"regret", "--config", config.string(), "--threads", "1", "--out", "X"}, {6});

  const fs::path report_a = dir / "report_a";
  const fs::path report_b = dir / "report_b";
  const CliCapture ra = run_cli_quiet(
      {"report", "--config", config.string(), "--threads", "1", "--out", report_a.string()});
  const CliCapture rb = run_cli_quiet(
      {"report", "--config", config.string(), "--threads", "1", "--out", report_b.string()});
  const bool report_same = ra.code == rb.code && dir_signature(report_a) == dir_signature(report_b);
  ok = ok && report_same;
  note << " report" << (report_same ? " ok" : " MISMATCH");

  std::cout << "criterion 10: " << (ok ? "PASS" : "FAIL") << " (bit-identical reruns:"
            << note.str() << ")" << std::endl;
  fs::remove_all(dir);
  return ok;
}

bool run_criterion(int n) {
  switch (n) {
    case 1: return criterion1();
    case 2: return criterion2();
    case 3: return criterion3();
    case 4: return criterion4();
    case 5: return criterion5();
    case 6: return criterion6();
    case 7: return criterion7();
    case 8: return criterion8();
    case 9: return criterion9();
    case 10: return criterion10();
    default: return false;
  }
}

}  // namespace

int main(int argc, char** argv) {
  int criterion = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      criterion = std::atoi(argv[i + 1]);
      ++i;
    } else {
      std::cerr << "usage: acceptance [--criterion N]" << std::endl;
      return 2;
    }
  }
  if (criterion != 0 && (criterion < 1 || criterion > 10)) {
    std::cerr << "usage: acceptance [--criterion N] with N in 1..10" << std::endl;
    return 2;
  }
  bool ok = true;
  try {
    if (criterion == 0) {
      for (int n = 1; n <= 10; ++n) ok = run_criterion(n) && ok;
    } else {
      ok = run_criterion(criterion);
    }
  } catch (const std::exception& e) {
    std::cout << "criterion " << criterion << ": FAIL (exception: " << e.what() << ")"
              << std::endl;
    return 1;
  }
  return ok ? 0 : 1;
}
