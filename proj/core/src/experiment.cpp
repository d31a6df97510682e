#include "bicex/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "bicex/baselines.hpp"
#include "bicex/bic.hpp"
#include "bicex/constants.hpp"
#include "bicex/contextual.hpp"
#include "bicex/detail_free.hpp"
#include "bicex/parallel.hpp"
#include "bicex/priors.hpp"
#include "bicex/rng.hpp"
#include "bicex/stats.hpp"
#include "bicex/svg.hpp"

namespace bicex {
namespace {

std::vector<double> prior_mean_vector(const PriorModel& prior) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(prior.num_arms()));
  for (int a = 0; a < prior.num_arms(); ++a) out.push_back(prior.prior_mean(a));
  return out;
}

const PriorModel& require_prior(const ExperimentConfig& cfg) {
  if (!cfg.prior.has_value())
    throw std::invalid_argument("experiment: algorithm kind " + cfg.algorithm.kind +
                                " needs a prior");
  return *cfg.prior;
}

PolicyClass constant_policies(int num_arms, int num_contexts) {
  PolicyClass out;
  out.reserve(static_cast<std::size_t>(num_arms));
  for (int a = 0; a < num_arms; ++a)
    out.emplace_back(static_cast<std::size_t>(num_contexts), a);
  return out;
}

PolicyClass effective_policies(const ExperimentConfig& cfg) {
  if (!cfg.policies.empty()) return cfg.policies;
  const ContextualPrior& prior = *cfg.contextual_prior;
  return constant_policies(prior.num_arms(), prior.num_contexts());
}

BanditSetup wrapped_setup(const ExperimentConfig& cfg, const PriorModel& prior) {
  BanditSetup setup;
  setup.num_arms = prior.num_arms();
  setup.horizon = cfg.horizon;
  setup.theta = cfg.algorithm.theta.value_or(1.0);
  setup.prior_means = prior_mean_vector(prior);
  return setup;
}

Transcript run_df_two_arm_pipeline(const ExperimentConfig& cfg, Environment& env,
                                   const std::vector<double>& prior_means,
                                   std::uint64_t replicate) {
  const AlgorithmConfig& a = cfg.algorithm;
  DfTwoArmSamplingConfig scfg;
  scfg.k = a.k;
  scfg.k_star = a.k_star;
  scfg.L = a.L;
  scfg.C = a.C;
  DfSamplingRun sampling =
      run_df_two_arm_sampling(scfg, env, prior_means, cfg.seed, replicate);
  const std::int64_t f = static_cast<std::int64_t>(sampling.transcript.rows.size());
  if (cfg.horizon < f)
    throw std::invalid_argument("experiment: horizon is shorter than the sampling stage");
  DfRaceConfig rcfg;
  rcfg.k = a.k;
  rcfg.theta = a.theta.value_or(1.0);
  rcfg.T = cfg.horizon;
  rcfg.rounds = cfg.horizon - f;
  DfRaceRun race = run_df_two_arm_race(sampling.samples, rcfg, env, cfg.seed, replicate);
  Transcript out = std::move(sampling.transcript);
  for (TranscriptRow row : race.transcript.rows) {
    row.round += f;
    row.role = out.role_id(race.transcript.roles.at(row.role));
    out.rows.push_back(std::move(row));
  }
  return out;
}

/// Per-round cumulative regret of one transcript. Plain bandit transcripts
/// compare against the best fixed arm; contextual transcripts against the
/// best policy in the class, weighted by the context distribution.
std::vector<double> cumulative_regret(const Transcript& t, const ContextSpace* contexts,
                                      const PolicyClass* policies) {
  double benchmark = 0.0;
  if (t.num_contexts > 1) {
    if (contexts == nullptr || policies == nullptr)
      throw std::invalid_argument("experiment: contextual regret needs the policy class");
    benchmark = std::numeric_limits<double>::lowest();
    for (const Policy& policy : *policies) {
      double value = 0.0;
      for (int x = 0; x < t.num_contexts; ++x)
        value += contexts->weights.at(static_cast<std::size_t>(x)) *
                 t.mean_of(policy.at(static_cast<std::size_t>(x)), x);
      benchmark = std::max(benchmark, value);
    }
  } else {
    for (int a = 0; a < t.num_arms(); ++a) benchmark = std::max(benchmark, t.mean_of(a, 0));
  }
  std::vector<double> out;
  out.reserve(t.rows.size());
  double played = 0.0;
  for (std::size_t s = 0; s < t.rows.size(); ++s) {
    played += t.mean_of(t.rows[s].arm, t.rows[s].context);
    out.push_back(benchmark * static_cast<double>(s + 1) - played);
  }
  return out;
}

struct CurveAccumulator {
  std::vector<double> sum;
  std::vector<double> sum2;
  std::int64_t count = 0;

  void add(const std::vector<double>& regret) {
    if (count == 0) {
      sum.assign(regret.size(), 0.0);
      sum2.assign(regret.size(), 0.0);
    }
    if (regret.size() != sum.size())
      throw std::logic_error("experiment: replicates disagree on the horizon");
    for (std::size_t s = 0; s < regret.size(); ++s) {
      sum[s] += regret[s];
      sum2[s] += regret[s] * regret[s];
    }
    ++count;
  }

  void merge(const CurveAccumulator& other) {
    if (other.count == 0) return;
    if (count == 0) {
      *this = other;
      return;
    }
    if (other.sum.size() != sum.size())
      throw std::logic_error("experiment: replicates disagree on the horizon");
    for (std::size_t s = 0; s < sum.size(); ++s) {
      sum[s] += other.sum[s];
      sum2[s] += other.sum2[s];
    }
    count += other.count;
  }
};

RegretCurve finish_curve(const CurveAccumulator& acc, double ci_level) {
  RegretCurve curve;
  curve.replicates = static_cast<int>(acc.count);
  curve.ci_level = ci_level;
  const double n = static_cast<double>(acc.count);
  const double z = normal_quantile(0.5 + ci_level / 2.0);
  curve.points.reserve(acc.sum.size());
  for (std::size_t s = 0; s < acc.sum.size(); ++s) {
    RegretPoint p;
    p.t = static_cast<std::int64_t>(s + 1);
    p.mean = acc.sum[s] / n;
    double se = 0.0;
    if (acc.count > 1) {
      const double var = (acc.sum2[s] - n * p.mean * p.mean) / (n - 1.0);
      se = std::sqrt(std::max(var, 0.0) / n);
    }
    p.lo = p.mean - z * se;
    p.hi = p.mean + z * se;
    curve.points.push_back(p);
  }
  return curve;
}

void write_file(const std::filesystem::path& path, const std::string& text,
                std::vector<std::string>& files, const std::filesystem::path& root) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("experiment: cannot write " + path.string());
  out << text;
  files.push_back(std::filesystem::relative(path, root).generic_string());
}

std::string provenance_line(const ExperimentConfig& cfg) {
  return "name=" + cfg.name + " seed=" + std::to_string(cfg.seed) +
         " config=" + config_hash(cfg.raw_text);
}

std::string regret_svg(const RegretCurve& curve, const ExperimentConfig& cfg) {
  const std::size_t total = curve.points.size();
  const std::size_t stride = std::max<std::size_t>(1, total / 512);
  SvgSeries mean{"mean", {}, {}};
  SvgSeries lo{"ci lower", {}, {}};
  SvgSeries hi{"ci upper", {}, {}};
  for (std::size_t s = 0; s < total; s += stride) {
    const std::size_t idx = std::min(s, total - 1);
    const RegretPoint& p = curve.points[idx];
    mean.x.push_back(static_cast<double>(p.t));
    mean.y.push_back(p.mean);
    lo.x.push_back(static_cast<double>(p.t));
    lo.y.push_back(p.lo);
    hi.x.push_back(static_cast<double>(p.t));
    hi.y.push_back(p.hi);
  }
  if (total > 0 && (total - 1) % stride != 0) {
    const RegretPoint& p = curve.points.back();
    mean.x.push_back(static_cast<double>(p.t));
    mean.y.push_back(p.mean);
    lo.x.push_back(static_cast<double>(p.t));
    lo.y.push_back(p.lo);
    hi.x.push_back(static_cast<double>(p.t));
    hi.y.push_back(p.hi);
  }
  return svg_line_chart(cfg.name + ": cumulative regret", "round", "regret",
                        {mean, lo, hi}, provenance_line(cfg));
}

std::string audit_svg(const AuditReport& report, const ExperimentConfig& cfg) {
  std::vector<std::string> row_labels;
  std::vector<std::pair<std::string, int>> row_keys;
  int max_arm = 0;
  for (const AuditCell& cell : report.cells) {
    const std::pair<std::string, int> key{cell.role, cell.recommended};
    if (std::find(row_keys.begin(), row_keys.end(), key) == row_keys.end()) {
      row_keys.push_back(key);
      row_labels.push_back(cell.role + " rec " + std::to_string(cell.recommended + 1));
    }
    max_arm = std::max(max_arm, std::max(cell.recommended, cell.competitor));
  }
  std::vector<std::string> col_labels;
  for (int j = 0; j <= max_arm; ++j) col_labels.push_back("vs " + std::to_string(j + 1));
  std::vector<double> values(row_keys.size() * col_labels.size(), 0.0);
  for (const AuditCell& cell : report.cells) {
    const std::pair<std::string, int> key{cell.role, cell.recommended};
    const std::size_t r = static_cast<std::size_t>(
        std::find(row_keys.begin(), row_keys.end(), key) - row_keys.begin());
    values[r * col_labels.size() + static_cast<std::size_t>(cell.competitor)] = cell.slack;
  }
  return svg_heatmap(cfg.name + ": audit slack", row_labels, col_labels, values,
                     provenance_line(cfg));
}

std::string constants_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json doc;
  doc["name"] = cfg.name;
  const ConstantsSettings& settings = *cfg.constants;
  doc["k"] = settings.k;
  doc["replicates"] = settings.replicates;
  try {
    if (cfg.contextual_prior.has_value()) {
      const ContextualPersuasionConstants constants = estimate_contextual_persuasion(
          *cfg.contextual_prior, settings.k, settings.replicates);
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
    } else {
      const PriorModel& prior = require_prior(cfg);
      const PersuasionConstants constants =
          estimate_persuasion_constants(prior, settings.k, settings.replicates);
      doc["persuadable"] = true;
      doc["tau"] = constants.tau_p;
      doc["rho"] = constants.rho_p;
      const std::int64_t L = prior.num_arms() == 2
                                 ? min_phase_length_two_arm(prior, settings.k,
                                                            settings.replicates)
                                 : min_phase_length_m_arm(prior, constants,
                                                          settings.replicates);
      doc["min_phase_length"] = L;
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
    }
  } catch (const PriorNotPersuadable& e) {
    doc["persuadable"] = false;
    doc["reason"] = e.what();
  }
  return doc.dump(2) + "\n";
}

}  // namespace

TranscriptRunner make_transcript_runner(const ExperimentConfig& cfg) {
  const AlgorithmConfig& algo = cfg.algorithm;
  if (algo.kind == "ctx_reduction") {
    if (!cfg.contextual_prior.has_value())
      throw std::invalid_argument("experiment: ctx_reduction needs a contextual prior");
    const ContextualPrior prior = *cfg.contextual_prior;
    const PolicyClass policies = effective_policies(cfg);
    const double epsilon = algo.epsilon_greedy;
    const ContextualReductionConfig rcfg{algo.k, algo.L, cfg.horizon};
    const std::uint64_t seed = cfg.seed;
    return [prior, policies, epsilon, rcfg, seed](std::uint64_t rep) {
      RngStream instance_rng = RngStream::derive(seed, rep, "instance", 0);
      ContextualEnvironment env = make_contextual_environment(prior, instance_rng);
      const ContextualFactory factory = [&](RngStream rng) {
        return epsilon_greedy_policies(policies, epsilon, prior.num_arms(),
                                       std::move(rng));
      };
      return run_contextual_reduction(prior, rcfg, factory, env, seed, rep).transcript;
    };
  }

  const PriorModel prior = require_prior(cfg);
  const std::uint64_t seed = cfg.seed;
  if (algo.kind == "two_arm_sampler" || algo.kind == "m_arm_sampler") {
    if (algo.kind == "two_arm_sampler" && prior.num_arms() != 2)
      throw std::invalid_argument("experiment: two_arm_sampler needs exactly two arms");
    const SamplerConfig scfg{algo.k, algo.L};
    const bool two_arm = algo.kind == "two_arm_sampler";
    return [prior, scfg, seed, two_arm](std::uint64_t rep) {
      RngStream instance_rng = RngStream::derive(seed, rep, "instance", 0);
      Environment env = make_environment(prior, instance_rng);
      return two_arm ? run_two_arm_sampler(prior, scfg, env, seed, rep).transcript
                     : run_m_arm_sampler(prior, scfg, env, seed, rep).transcript;
    };
  }
  if (algo.kind == "reduction") {
    const ReductionConfig rcfg{algo.k, algo.L, cfg.horizon};
    const BanditSetup setup = wrapped_setup(cfg, prior);
    const std::string wrapped = algo.wrapped;
    return [prior, rcfg, setup, wrapped, seed](std::uint64_t rep) {
      RngStream instance_rng = RngStream::derive(seed, rep, "instance", 0);
      Environment env = make_environment(prior, instance_rng);
      const WrappedFactory factory = [&](RngStream) { return make_bandit(wrapped, setup); };
      return run_black_box_reduction(prior, rcfg, factory, env, seed, rep).transcript;
    };
  }
  if (algo.kind == "detail_free") {
    DetailFreeConfig dcfg;
    dcfg.mu_hat = algo.mu_hat;
    dcfg.N = algo.N;
    dcfg.T = cfg.horizon;
    dcfg.tau = algo.tau;
    dcfg.theta = algo.theta;
    const std::vector<double> means = prior_mean_vector(prior);
    return [prior, dcfg, means, seed](std::uint64_t rep) {
      RngStream instance_rng = RngStream::derive(seed, rep, "instance", 0);
      Environment env = make_environment(prior, instance_rng);
      return run_detail_free(dcfg, env, means, seed, rep).transcript;
    };
  }
  if (algo.kind == "df_two_arm") {
    if (prior.num_arms() != 2)
      throw std::invalid_argument("experiment: df_two_arm needs exactly two arms");
    const std::vector<double> means = prior_mean_vector(prior);
    ExperimentConfig snapshot = cfg;
    return [prior, means, snapshot](std::uint64_t rep) {
      RngStream instance_rng = RngStream::derive(snapshot.seed, rep, "instance", 0);
      Environment env = make_environment(prior, instance_rng);
      return run_df_two_arm_pipeline(snapshot, env, means, rep);
    };
  }
  if (algo.kind == "standalone") {
    const BanditSetup setup = wrapped_setup(cfg, prior);
    const std::string wrapped = algo.wrapped;
    const std::int64_t T = cfg.horizon;
    return [prior, setup, wrapped, T, seed](std::uint64_t rep) {
      RngStream instance_rng = RngStream::derive(seed, rep, "instance", 0);
      Environment env = make_environment(prior, instance_rng);
      const WrappedFactory factory = [&](RngStream) { return make_bandit(wrapped, setup); };
      return run_standalone_bandit(env, factory, T, seed, rep).transcript;
    };
  }
  throw std::invalid_argument("experiment: unknown algorithm kind " + algo.kind);
}

RegretCurve experiment_regret_curve(const ExperimentConfig& cfg, int threads) {
  if (cfg.replicates < 1)
    throw std::invalid_argument("experiment: replicates must be positive");
  const TranscriptRunner runner = make_transcript_runner(cfg);
  const ContextSpace* contexts =
      cfg.contextual_prior.has_value() ? &cfg.contextual_prior->contexts() : nullptr;
  PolicyClass regret_policies;
  if (cfg.contextual_prior.has_value()) regret_policies = effective_policies(cfg);
  const PolicyClass* policies =
      cfg.contextual_prior.has_value() ? &regret_policies : nullptr;
  const CurveAccumulator acc = parallel_reduce<CurveAccumulator>(
      static_cast<std::int64_t>(cfg.replicates),
      [&](std::int64_t lo, std::int64_t hi) {
        CurveAccumulator local;
        for (std::int64_t rep = lo; rep < hi; ++rep) {
          const Transcript t = runner(static_cast<std::uint64_t>(rep));
          local.add(cumulative_regret(t, contexts, policies));
        }
        return local;
      },
      [](CurveAccumulator& into, const CurveAccumulator& from) { into.merge(from); },
      threads);
  return finish_curve(acc, 0.95);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                                int threads) {
  namespace fs = std::filesystem;
  if (cfg.replicates < 1)
    throw std::invalid_argument("experiment: replicates must be positive");
  const TranscriptRunner runner = make_transcript_runner(cfg);

  ExperimentResult result;
  result.out_dir = out_dir;
  const fs::path root(out_dir);
  fs::create_directories(root);

  write_file(root / "config.json",
             cfg.raw_text.empty() ? std::string("{}\n") : cfg.raw_text, result.files, root);

  if (cfg.transcripts_to_write > 0) {
    fs::create_directories(root / "transcripts");
    for (int rep = 0; rep < cfg.transcripts_to_write; ++rep) {
      const Transcript t = runner(static_cast<std::uint64_t>(rep));
      std::ofstream out(root / "transcripts" / ("rep_" + std::to_string(rep) + ".jsonl"),
                        std::ios::binary);
      if (!out) throw std::runtime_error("experiment: cannot write transcripts");
      t.to_jsonl(out);
      result.files.push_back("transcripts/rep_" + std::to_string(rep) + ".jsonl");
    }
  }

  const RegretCurve curve = experiment_regret_curve(cfg, threads);
  write_file(root / "metrics.csv", curve.to_csv(), result.files, root);
  write_file(root / "regret.svg", regret_svg(curve, cfg), result.files, root);
  result.final_regret = curve.final_point();

  if (cfg.constants.has_value())
    write_file(root / "constants.json", constants_json(cfg), result.files, root);

  if (cfg.audit.has_value()) {
    AuditOptions opts;
    opts.min_cell = cfg.audit->min_cell;
    opts.ci_level = cfg.audit->ci_level;
    opts.epsilon = cfg.audit->epsilon;
    opts.threads = threads;
    const AuditReport report = audit_bic(runner, cfg.audit->replicates, opts);
    write_file(root / "audit.json", report.to_json(), result.files, root);
    write_file(root / "audit.svg", audit_svg(report, cfg), result.files, root);
    result.audit_ran = true;
    result.audit_pass = report.pass;
  }
  return result;
}

}  // namespace bicex
