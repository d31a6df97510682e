#include "cli.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "bicex/audit.hpp"
#include "bicex/baselines.hpp"
#include "bicex/bic.hpp"
#include "bicex/config.hpp"
#include "bicex/constants.hpp"
#include "bicex/contextual.hpp"
#include "bicex/detail_free.hpp"
#include "bicex/experiment.hpp"
#include "bicex/metrics.hpp"
#include "bicex/priors.hpp"
#include "bicex/rng.hpp"

namespace bicex {
namespace {

void write_text(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  out << text;
}

void write_transcript(const std::string& out_path, const Transcript& t) {
  if (out_path.empty() || out_path == "-") {
    t.to_jsonl(std::cout);
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  t.to_jsonl(out);
}

nlohmann::ordered_json interval_json(const IntervalEstimate& e) {
  nlohmann::ordered_json out;
  out["point"] = e.point;
  out["lcb"] = e.lcb;
  out["ucb"] = e.ucb;
  return out;
}

std::vector<double> prior_mean_vector(const PriorModel& prior) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(prior.num_arms()));
  for (int a = 0; a < prior.num_arms(); ++a) out.push_back(prior.prior_mean(a));
  return out;
}

std::vector<int> one_based(const std::vector<int>& arms) {
  std::vector<int> out;
  out.reserve(arms.size());
  for (int a : arms) out.push_back(a + 1);
  return out;
}

struct ConstantsArgs {
  std::string prior_path;
  bool contextual = false;
  std::int64_t k = 1;
  int replicates = 20000;
  double tau = 0.0;
  std::string out;
};

int cmd_constants(const ConstantsArgs& a) {
  nlohmann::ordered_json doc;
  doc["k"] = a.k;
  doc["replicates"] = a.replicates;
  if (a.contextual) {
    const ContextualPrior prior = load_contextual_prior(a.prior_path);
    doc["arms"] = prior.num_arms();
    doc["contexts"] = prior.num_contexts();
    try {
      const ContextualPersuasionConstants constants =
          estimate_contextual_persuasion(prior, a.k, a.replicates);
      doc["persuadable"] = true;
      doc["tau"] = constants.tau_p;
      doc["rho"] = constants.rho_p;
      doc["policy_gap_bound"] = constants.l_p;
      nlohmann::ordered_json pairs = nlohmann::ordered_json::array();
      for (const RankPairPersuasion& pair : constants.pairs) {
        nlohmann::ordered_json row;
        row["rank"] = pair.rank;
        row["comparator"] = pair.comparator;
        row["feasible"] = pair.feasible;
        row["tau_star"] = pair.tau_star;
        row["rho_lcb"] = pair.rho_lcb;
        pairs.push_back(std::move(row));
      }
      doc["pairs"] = std::move(pairs);
    } catch (const PriorNotPersuadable& e) {
      doc["persuadable"] = false;
      doc["reason"] = e.what();
    }
    write_text(a.out, doc.dump(2) + "\n");
    return 0;
  }
  const PriorModel prior = load_prior(a.prior_path);
  doc["arms"] = prior.num_arms();
  doc["expected_max_mean"] = interval_json(expected_max_mean(prior, a.replicates));
  try {
    const PersuasionConstants constants =
        estimate_persuasion_constants(prior, a.k, a.replicates);
    doc["persuadable"] = true;
    doc["tau"] = constants.tau_p;
    doc["rho"] = constants.rho_p;
    if (prior.num_arms() == 2) {
      doc["exploration_gain"] =
          interval_json(exploration_gain_two_arm(prior, a.k, a.replicates));
      doc["min_phase_length"] = min_phase_length_two_arm(prior, a.k, a.replicates);
    } else {
      doc["min_phase_length"] = min_phase_length_m_arm(prior, constants, a.replicates);
    }
    nlohmann::ordered_json arms = nlohmann::ordered_json::array();
    for (const ArmPersuasion& arm : constants.per_arm) {
      nlohmann::ordered_json row;
      row["arm"] = arm.arm + 1;
      row["feasible"] = arm.feasible;
      row["tau_star"] = arm.tau_star;
      row["rho_lcb"] = arm.rho_lcb;
      arms.push_back(std::move(row));
    }
    doc["per_arm"] = std::move(arms);
  } catch (const PriorNotPersuadable& e) {
    doc["persuadable"] = false;
    doc["reason"] = e.what();
  }
  if (a.tau > 0.0)
    doc["racing_min_probability"] =
        interval_json(racing_min_probability(prior, a.tau, a.replicates));
  write_text(a.out, doc.dump(2) + "\n");
  return 0;
}

struct DfThresholdArgs {
  int m = 2;
  double mu_m0 = 0.0;
  double mean_gap = 0.0;
  double lambda = 0.5;
  double event_prob = 0.0;
  std::int64_t T = 1;
  double tau = 0.0;
  double race_prob = 0.0;
  std::string out;
};

int cmd_df_thresholds(const DfThresholdArgs& a) {
  DetailFreeInputs in;
  in.m = a.m;
  in.mu_m0 = a.mu_m0;
  in.mean_gap = a.mean_gap;
  in.lambda = a.lambda;
  in.prior_cdf_point = a.event_prob;
  in.T = a.T;
  in.tau = a.tau;
  in.racing_min_prob = a.race_prob;
  const DetailFreeThresholds th = detail_free_thresholds(in);
  nlohmann::ordered_json doc;
  doc["C"] = th.C;
  doc["k"] = th.k;
  doc["L"] = th.L;
  doc["theta"] = th.theta;
  doc["k_race"] = th.k_race;
  doc["n_p"] = th.n_p;
  write_text(a.out, doc.dump(2) + "\n");
  return 0;
}

struct RunBicArgs {
  std::string prior_path;
  std::string algo = "two_arm";
  std::string wrapped = "ucb1";
  std::int64_t k = 1;
  std::int64_t L = 1;
  std::int64_t T = 0;
  std::optional<double> theta;
  std::uint64_t seed = 2024;
  std::uint64_t replicate = 0;
  std::string out;
  std::string summary;
};

int cmd_run_bic(const RunBicArgs& a) {
  const PriorModel prior = load_prior(a.prior_path);
  RngStream instance_rng = RngStream::derive(a.seed, a.replicate, "instance", 0);
  Environment env = make_environment(prior, instance_rng);
  nlohmann::ordered_json summary;
  summary["kind"] = a.algo;
  Transcript transcript;
  if (a.algo == "two_arm" || a.algo == "m_arm") {
    const SamplerConfig cfg{a.k, a.L};
    SamplerRun run = a.algo == "two_arm"
                         ? run_two_arm_sampler(prior, cfg, env, a.seed, a.replicate)
                         : run_m_arm_sampler(prior, cfg, env, a.seed, a.replicate);
    summary["exploit_arms"] = one_based(run.exploit_arms);
    summary["dedicated_rounds"] = run.dedicated_rounds;
    transcript = std::move(run.transcript);
  } else if (a.algo == "reduction") {
    if (a.T <= 0) throw std::runtime_error("reduction needs --T");
    BanditSetup setup;
    setup.num_arms = prior.num_arms();
    setup.horizon = a.T;
    setup.theta = a.theta.value_or(1.0);
    setup.prior_means = prior_mean_vector(prior);
    const WrappedFactory factory = [&](RngStream) { return make_bandit(a.wrapped, setup); };
    ReductionRun run =
        run_black_box_reduction(prior, {a.k, a.L, a.T}, factory, env, a.seed, a.replicate);
    summary["wrapped"] = a.wrapped;
    summary["sampling_rounds"] = run.sampling_rounds;
    summary["wrapped_arms"] = one_based(run.wrapped_arms);
    summary["dedicated_rounds"] = run.dedicated_rounds;
    transcript = std::move(run.transcript);
  } else {
    throw std::runtime_error("unknown --algo " + a.algo +
                             " (expected two_arm, m_arm, or reduction)");
  }
  summary["rounds"] = transcript.rows.size();
  write_transcript(a.out, transcript);
  if (!a.summary.empty()) write_text(a.summary, summary.dump(2) + "\n");
  return 0;
}

struct RunDfArgs {
  std::string prior_path;
  double mu_hat = 0.0;
  std::int64_t N = 1;
  std::int64_t T = 1;
  double tau = 0.1;
  std::optional<double> theta;
  std::uint64_t seed = 2024;
  std::uint64_t replicate = 0;
  std::string out;
  std::string summary;
};

int cmd_run_df(const RunDfArgs& a) {
  const PriorModel prior = load_prior(a.prior_path);
  const std::vector<double> means = prior_mean_vector(prior);
  RngStream instance_rng = RngStream::derive(a.seed, a.replicate, "instance", 0);
  Environment env = make_environment(prior, instance_rng);
  DetailFreeConfig cfg;
  cfg.mu_hat = a.mu_hat;
  cfg.N = a.N;
  cfg.T = a.T;
  cfg.tau = a.tau;
  cfg.theta = a.theta;
  const DetailFreeRun run = run_detail_free(cfg, env, means, a.seed, a.replicate);
  write_transcript(a.out, run.transcript);
  if (!a.summary.empty()) {
    nlohmann::ordered_json doc;
    doc["C"] = run.C;
    doc["k"] = run.k;
    doc["L"] = run.L;
    doc["theta"] = run.theta;
    doc["sampling_rounds"] = run.sampling_rounds;
    doc["survivor"] = run.survivor + 1;
    doc["rounds"] = run.transcript.rows.size();
    write_text(a.summary, doc.dump(2) + "\n");
  }
  return 0;
}

struct RunCtxArgs {
  std::string prior_path;
  std::int64_t k = 1;
  std::int64_t L = 1;
  std::int64_t T = 0;
  double epsilon = 0.1;
  std::vector<std::string> policies;
  std::uint64_t seed = 2024;
  std::uint64_t replicate = 0;
  std::string out;
  std::string summary;
};

Policy parse_policy(const std::string& text, int num_contexts, int num_arms) {
  Policy policy;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const int arm = std::stoi(item);
    if (arm < 1 || arm > num_arms)
      throw std::runtime_error("--policy arm " + item + " is out of range");
    policy.push_back(arm - 1);
  }
  if (static_cast<int>(policy.size()) != num_contexts)
    throw std::runtime_error("--policy needs one arm per context (" +
                             std::to_string(num_contexts) + " contexts)");
  return policy;
}

int cmd_run_ctx(const RunCtxArgs& a) {
  const ContextualPrior prior = load_contextual_prior(a.prior_path);
  PolicyClass policies;
  if (a.policies.empty()) {
    for (int arm = 0; arm < prior.num_arms(); ++arm)
      policies.emplace_back(static_cast<std::size_t>(prior.num_contexts()), arm);
  } else {
    for (const std::string& text : a.policies)
      policies.push_back(parse_policy(text, prior.num_contexts(), prior.num_arms()));
  }
  RngStream instance_rng = RngStream::derive(a.seed, a.replicate, "instance", 0);
  ContextualEnvironment env = make_contextual_environment(prior, instance_rng);
  const ContextualFactory factory = [&](RngStream rng) {
    return epsilon_greedy_policies(policies, a.epsilon, prior.num_arms(), std::move(rng));
  };
  const ContextualReductionRun run = run_contextual_reduction(
      prior, {a.k, a.L, a.T}, factory, env, a.seed, a.replicate);
  write_transcript(a.out, run.transcript);
  if (!a.summary.empty()) {
    nlohmann::ordered_json doc;
    doc["sampling_rounds"] = run.sampling_rounds;
    doc["wrapped_arms"] = one_based(run.wrapped_arms);
    doc["dedicated_rounds"] = run.dedicated_rounds;
    doc["rounds"] = run.transcript.rows.size();
    write_text(a.summary, doc.dump(2) + "\n");
  }
  return 0;
}

struct ConfigArgs {
  std::string config_path;
  std::string out;
  int threads = 0;
};

int cmd_audit(const ConfigArgs& a) {
  const ExperimentConfig cfg = load_experiment_config(a.config_path);
  const AuditSettings settings = cfg.audit.value_or(AuditSettings{});
  AuditOptions opts;
  opts.min_cell = settings.min_cell;
  opts.ci_level = settings.ci_level;
  opts.epsilon = settings.epsilon;
  opts.threads = a.threads;
  const AuditReport report =
      audit_bic(make_transcript_runner(cfg), settings.replicates, opts);
  write_text(a.out, report.to_json());
  return report.pass ? 0 : 1;
}

int cmd_regret(const ConfigArgs& a) {
  const ExperimentConfig cfg = load_experiment_config(a.config_path);
  const RegretCurve curve = experiment_regret_curve(cfg, a.threads);
  write_text(a.out, curve.to_csv());
  return 0;
}

int cmd_report(const ConfigArgs& a) {
  const ExperimentConfig cfg = load_experiment_config(a.config_path);
  const ExperimentResult result = run_experiment(cfg, a.out, a.threads);
  std::cout << "wrote " << result.files.size() << " files under " << result.out_dir << "\n";
  for (const std::string& file : result.files) std::cout << "  " << file << "\n";
  std::cout << "final regret " << result.final_regret.mean << " [" << result.final_regret.lo
            << ", " << result.final_regret.hi << "] at t=" << result.final_regret.t << "\n";
  if (result.audit_ran)
    std::cout << "audit " << (result.audit_pass ? "PASS" : "FAIL") << "\n";
  return result.audit_ran && !result.audit_pass ? 1 : 0;
}

}  // namespace

int cli_main(std::vector<std::string> args) {
  CLI::App app{"Incentive-compatible bandit exploration toolkit", "bicex"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "bicex 0.1.0");
  int rc = 0;

  ConstantsArgs constants_args;
  CLI::App* constants = app.add_subcommand(
      "constants", "Estimate persuasion constants and phase thresholds for a prior");
  constants->add_option("--prior", constants_args.prior_path, "Prior JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  constants->add_flag("--contextual", constants_args.contextual,
                      "Treat the prior file as a contextual prior");
  constants->add_option("--k", constants_args.k, "Exploration depth")->required();
  constants->add_option("--replicates", constants_args.replicates, "Monte-Carlo draws");
  constants->add_option("--tau", constants_args.tau,
                        "Racing margin for the minimum isolation probability");
  constants->add_option("--out", constants_args.out, "Output file (default stdout)");
  constants->callback([&] { rc = cmd_constants(constants_args); });

  DfThresholdArgs df_args;
  CLI::App* df_thresholds = app.add_subcommand(
      "df-thresholds", "Detail-free parameter thresholds from coarse prior facts");
  df_thresholds->add_option("--arms", df_args.m, "Number of arms")->required();
  df_thresholds->add_option("--mu-m0", df_args.mu_m0, "Prior mean of the worst arm")
      ->required();
  df_thresholds->add_option("--mean-gap", df_args.mean_gap,
                            "Best minus worst prior mean");
  df_thresholds->add_option("--lambda", df_args.lambda, "Margin factor, C = lambda mu_m0");
  df_thresholds->add_option("--event-prob", df_args.event_prob,
                            "Probability of the persuasion event")
      ->required();
  df_thresholds->add_option("--T", df_args.T, "Horizon")->required();
  df_thresholds->add_option("--tau", df_args.tau, "Racing margin");
  df_thresholds->add_option("--race-prob", df_args.race_prob,
                            "Minimum isolation probability at the margin");
  df_thresholds->add_option("--out", df_args.out, "Output file (default stdout)");
  df_thresholds->callback([&] { rc = cmd_df_thresholds(df_args); });

  RunBicArgs bic_args;
  CLI::App* run_bic = app.add_subcommand(
      "run-bic", "Run one replicate of a prior-aware sampler or reduction");
  run_bic->add_option("--prior", bic_args.prior_path, "Prior JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  run_bic->add_option("--algo", bic_args.algo, "two_arm, m_arm, or reduction");
  run_bic->add_option("--k", bic_args.k, "Samples per arm")->required();
  run_bic->add_option("--L", bic_args.L, "Phase length")->required();
  run_bic->add_option("--T", bic_args.T, "Horizon (reduction only)");
  run_bic->add_option("--wrapped", bic_args.wrapped, "Wrapped algorithm name");
  run_bic->add_option("--theta", bic_args.theta, "Elimination confidence parameter");
  run_bic->add_option("--seed", bic_args.seed, "Root seed");
  run_bic->add_option("--replicate", bic_args.replicate, "Replicate index");
  run_bic->add_option("--out", bic_args.out, "Transcript JSONL file (default stdout)");
  run_bic->add_option("--summary", bic_args.summary, "Summary JSON file");
  run_bic->callback([&] { rc = cmd_run_bic(bic_args); });

  RunDfArgs run_df_args;
  CLI::App* run_df = app.add_subcommand(
      "run-df", "Run one replicate of the detail-free sampling and racing pipeline");
  run_df->add_option("--prior", run_df_args.prior_path, "Prior JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  run_df->add_option("--mu-hat", run_df_args.mu_hat, "Coarse lowest prior mean estimate")
      ->required();
  run_df->add_option("--N", run_df_args.N, "Master parameter")->required();
  run_df->add_option("--T", run_df_args.T, "Horizon")->required();
  run_df->add_option("--tau", run_df_args.tau, "Racing margin for threshold reports");
  run_df->add_option("--theta", run_df_args.theta, "Racing confidence override");
  run_df->add_option("--seed", run_df_args.seed, "Root seed");
  run_df->add_option("--replicate", run_df_args.replicate, "Replicate index");
  run_df->add_option("--out", run_df_args.out, "Transcript JSONL file (default stdout)");
  run_df->add_option("--summary", run_df_args.summary, "Derived-constants JSON file");
  run_df->callback([&] { rc = cmd_run_df(run_df_args); });

  RunCtxArgs ctx_args;
  CLI::App* run_ctx = app.add_subcommand(
      "run-ctx", "Run one replicate of the contextual reduction");
  run_ctx->add_option("--prior", ctx_args.prior_path, "Contextual prior JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  run_ctx->add_option("--k", ctx_args.k, "Samples per arm-rank")->required();
  run_ctx->add_option("--L", ctx_args.L, "Phase length")->required();
  run_ctx->add_option("--T", ctx_args.T, "Horizon")->required();
  run_ctx->add_option("--epsilon", ctx_args.epsilon, "Wrapped learner exploration rate");
  run_ctx->add_option("--policy", ctx_args.policies,
                      "Policy as comma-separated one-based arms per context (repeatable)");
  run_ctx->add_option("--seed", ctx_args.seed, "Root seed");
  run_ctx->add_option("--replicate", ctx_args.replicate, "Replicate index");
  run_ctx->add_option("--out", ctx_args.out, "Transcript JSONL file (default stdout)");
  run_ctx->add_option("--summary", ctx_args.summary, "Summary JSON file");
  run_ctx->callback([&] { rc = cmd_run_ctx(ctx_args); });

  ConfigArgs audit_args;
  CLI::App* audit = app.add_subcommand(
      "audit", "Audit an experiment's recommendation policy for incentive compatibility");
  audit->add_option("--config", audit_args.config_path, "Experiment JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  audit->add_option("--out", audit_args.out, "Report JSON file (default stdout)");
  audit->add_option("--threads", audit_args.threads, "Worker threads (0 = auto)");
  audit->callback([&] { rc = cmd_audit(audit_args); });

  ConfigArgs regret_args;
  CLI::App* regret = app.add_subcommand("regret", "Per-round mean cumulative regret as CSV");
  regret->add_option("--config", regret_args.config_path, "Experiment JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  regret->add_option("--out", regret_args.out, "CSV file (default stdout)");
  regret->add_option("--threads", regret_args.threads, "Worker threads (0 = auto)");
  regret->callback([&] { rc = cmd_regret(regret_args); });

  ConfigArgs report_args;
  CLI::App* report = app.add_subcommand(
      "report", "Run an experiment end to end and write its artifact directory");
  report->add_option("--config", report_args.config_path, "Experiment JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  report->add_option("--out", report_args.out, "Output directory")->required();
  report->add_option("--threads", report_args.threads, "Worker threads (0 = auto)");
  report->callback([&] { rc = cmd_report(report_args); });

  std::reverse(args.begin(), args.end());
  try {
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return rc;
}

}  // namespace bicex
