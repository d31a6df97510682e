#include "bicex/config.hpp"

#include <fstream>
#include <sstream>
#include <utility>
#include <vector>

#include "json.hpp"

namespace bicex {

namespace {

using nlohmann::json;

std::string join_path(const std::string& base, const std::string& leaf) {
  return base.empty() ? leaf : base + "." + leaf;
}

const json& require(const json& j, const std::string& path, const std::string& key) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw ConfigError(join_path(path, key), "missing required field");
  return *it;
}

double require_number(const json& j, const std::string& path, const std::string& key) {
  const json& v = require(j, path, key);
  if (!v.is_number()) throw ConfigError(join_path(path, key), "expected a number");
  return v.get<double>();
}

std::int64_t require_int(const json& j, const std::string& path, const std::string& key) {
  const json& v = require(j, path, key);
  if (!v.is_number_integer()) throw ConfigError(join_path(path, key), "expected an integer");
  return v.get<std::int64_t>();
}

std::string require_string(const json& j, const std::string& path, const std::string& key) {
  const json& v = require(j, path, key);
  if (!v.is_string()) throw ConfigError(join_path(path, key), "expected a string");
  return v.get<std::string>();
}

double number_or(const json& j, const std::string& path, const std::string& key, double fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(join_path(path, key), "expected a number");
  return v.get<double>();
}

std::int64_t int_or(const json& j, const std::string& path, const std::string& key,
                    std::int64_t fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError(join_path(path, key), "expected an integer");
  return v.get<std::int64_t>();
}

std::string string_or(const json& j, const std::string& path, const std::string& key,
                      const std::string& fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_string()) throw ConfigError(join_path(path, key), "expected a string");
  return v.get<std::string>();
}

bool bool_or(const json& j, const std::string& path, const std::string& key, bool fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_boolean()) throw ConfigError(join_path(path, key), "expected a boolean");
  return v.get<bool>();
}

std::vector<double> number_array(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) {
      throw ConfigError(path + "[" + std::to_string(i) + "]", "expected a number");
    }
    out.push_back(v[i].get<double>());
  }
  return out;
}

ArmMarginal parse_marginal(const json& j, const std::string& path) {
  const std::string kind = require_string(j, path, "kind");
  if (kind == "gaussian") {
    return ArmMarginal::gaussian_prior(require_number(j, path, "mean"),
                                       require_number(j, path, "variance"));
  }
  if (kind == "beta") {
    return ArmMarginal::beta_prior(require_number(j, path, "alpha"),
                                   require_number(j, path, "beta"));
  }
  if (kind == "grid") {
    std::vector<double> weights;
    if (j.contains("weights")) weights = number_array(j.at("weights"), join_path(path, "weights"));
    const std::int64_t cells = j.contains("weights")
                                   ? static_cast<std::int64_t>(weights.size())
                                   : int_or(j, path, "cells", 10000);
    if (cells < 1 || cells > 10000000) {
      throw ConfigError(join_path(path, "cells"), "expected between 1 and 10^7 cells");
    }
    return ArmMarginal::grid_prior(require_number(j, path, "lo"), require_number(j, path, "hi"),
                                   static_cast<int>(cells), std::move(weights));
  }
  if (kind == "point") {
    return ArmMarginal::point_prior(require_number(j, path, "value"));
  }
  throw ConfigError(join_path(path, "kind"),
                    "unknown marginal kind '" + kind + "' (gaussian, beta, grid, point)");
}

RewardFamily parse_reward(const json& j, const std::string& path) {
  const std::string kind = require_string(j, path, "kind");
  RewardFamily fam;
  if (kind == "bernoulli") {
    fam.kind = RewardFamily::Kind::bernoulli;
  } else if (kind == "gaussian") {
    fam.kind = RewardFamily::Kind::gaussian;
    fam.noise_var = require_number(j, path, "noise_var");
    if (fam.noise_var <= 0.0) {
      throw ConfigError(join_path(path, "noise_var"), "expected a positive noise variance");
    }
  } else if (kind == "point") {
    fam.kind = RewardFamily::Kind::point_mass;
  } else {
    throw ConfigError(join_path(path, "kind"),
                      "unknown reward kind '" + kind + "' (bernoulli, gaussian, point)");
  }
  return fam;
}

std::vector<ArmMarginal> parse_marginals(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) throw ConfigError(path, "expected a nonempty array");
  std::vector<ArmMarginal> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(parse_marginal(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::vector<RewardFamily> parse_rewards(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) throw ConfigError(path, "expected a nonempty array");
  std::vector<RewardFamily> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(parse_reward(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

Correlation parse_correlation(const json& j, const std::string& path) {
  const std::string c = string_or(j, path, "correlation", "independent");
  if (c == "independent") return Correlation::independent;
  if (c == "offset") return Correlation::offset;
  throw ConfigError(join_path(path, "correlation"),
                    "unknown correlation '" + c + "' (independent, offset)");
}

PriorModel parse_prior_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected a prior object");
  std::vector<ArmMarginal> arms = parse_marginals(require(j, path, "arms"), join_path(path, "arms"));
  std::vector<RewardFamily> rewards =
      parse_rewards(require(j, path, "rewards"), join_path(path, "rewards"));
  const Correlation corr = parse_correlation(j, path);
  std::vector<double> offsets;
  if (j.contains("offsets")) offsets = number_array(j.at("offsets"), join_path(path, "offsets"));
  const bool relabel = bool_or(j, path, "relabel", false);
  try {
    if (relabel) {
      if (corr != Correlation::independent || !offsets.empty()) {
        throw ConfigError(join_path(path, "relabel"),
                          "relabeling applies to independent priors only");
      }
      return PriorModel::relabeled(std::move(arms), std::move(rewards));
    }
    return PriorModel(std::move(arms), std::move(rewards), corr, std::move(offsets));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(path, e.what());
  }
}

FeedbackKind parse_feedback_kind(const json& j, const std::string& path) {
  const std::string kind = require_string(j, path, "kind");
  if (kind == "none") return FeedbackKind::none;
  if (kind == "noisy_mean") return FeedbackKind::noisy_mean;
  throw ConfigError(join_path(path, "kind"),
                    "unknown feedback kind '" + kind + "' (none, noisy_mean)");
}

ContextualPrior parse_contextual_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected a contextual prior object");
  const json& ctx = require(j, path, "contexts");
  ContextSpace space;
  space.weights = number_array(require(ctx, join_path(path, "contexts"), "weights"),
                               join_path(path, "contexts.weights"));
  std::vector<ArmMarginal> cells =
      parse_marginals(require(j, path, "cells"), join_path(path, "cells"));
  std::vector<RewardFamily> rewards =
      parse_rewards(require(j, path, "rewards"), join_path(path, "rewards"));
  const Correlation corr = parse_correlation(j, path);
  std::vector<double> offsets;
  if (j.contains("offsets")) offsets = number_array(j.at("offsets"), join_path(path, "offsets"));
  FeedbackKind fb = FeedbackKind::none;
  double fb_noise = 0.0;
  if (j.contains("feedback")) {
    const std::string fb_path = join_path(path, "feedback");
    fb = parse_feedback_kind(j.at("feedback"), fb_path);
    if (fb == FeedbackKind::noisy_mean) {
      fb_noise = require_number(j.at("feedback"), fb_path, "noise_var");
    }
  }
  try {
    return ContextualPrior(std::move(cells), std::move(rewards), std::move(space), corr,
                           std::move(offsets), fb, fb_noise);
  } catch (const std::exception& e) {
    throw ConfigError(path, e.what());
  }
}

PolicyClass parse_policies(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) throw ConfigError(path, "expected a nonempty array of policies");
  PolicyClass out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string p_path = path + "[" + std::to_string(i) + "]";
    if (!v[i].is_array() || v[i].empty()) {
      throw ConfigError(p_path, "expected a nonempty context-to-arm table");
    }
    Policy policy;
    for (std::size_t x = 0; x < v[i].size(); ++x) {
      if (!v[i][x].is_number_integer()) {
        throw ConfigError(p_path + "[" + std::to_string(x) + "]", "expected a 1-based arm index");
      }
      const std::int64_t arm = v[i][x].get<std::int64_t>();
      if (arm < 1) {
        throw ConfigError(p_path + "[" + std::to_string(x) + "]", "expected a 1-based arm index");
      }
      policy.push_back(static_cast<int>(arm - 1));
    }
    out.push_back(std::move(policy));
  }
  return out;
}

json parse_document(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<document>", e.what());
  }
}

AlgorithmConfig parse_algorithm(const json& j, const std::string& path) {
  AlgorithmConfig algo;
  algo.kind = require_string(j, path, "kind");
  const bool known =
      algo.kind == "two_arm_sampler" || algo.kind == "m_arm_sampler" || algo.kind == "reduction" ||
      algo.kind == "detail_free" || algo.kind == "df_two_arm" || algo.kind == "standalone" ||
      algo.kind == "ctx_reduction";
  if (!known) {
    throw ConfigError(join_path(path, "kind"), "unknown algorithm kind '" + algo.kind + "'");
  }
  algo.k = int_or(j, path, "k", 1);
  algo.L = int_or(j, path, "L", 1);
  algo.wrapped = string_or(j, path, "wrapped", "ucb1");
  algo.mu_hat = number_or(j, path, "mu_hat", 0.0);
  algo.N = int_or(j, path, "N", 1);
  algo.tau = number_or(j, path, "tau", 0.1);
  if (j.contains("theta")) algo.theta = require_number(j, path, "theta");
  algo.k_star = int_or(j, path, "k_star", 1);
  algo.C = number_or(j, path, "C", 0.0);
  algo.epsilon_greedy = number_or(j, path, "epsilon", 0.1);
  return algo;
}

}  // namespace

PriorModel parse_prior(const std::string& json_text) {
  return parse_prior_object(parse_document(json_text), "prior");
}

ContextualPrior parse_contextual_prior(const std::string& json_text) {
  return parse_contextual_object(parse_document(json_text), "prior");
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  const json doc = parse_document(json_text);
  if (!doc.is_object()) throw ConfigError("<document>", "expected a configuration object");
  ExperimentConfig cfg;
  cfg.raw_text = json_text;
  cfg.name = string_or(doc, "", "name", "experiment");
  const std::int64_t seed = int_or(doc, "", "seed", 2024);
  if (seed < 0) throw ConfigError("seed", "expected a nonnegative integer");
  cfg.seed = static_cast<std::uint64_t>(seed);
  const std::int64_t replicates = int_or(doc, "", "replicates", 100);
  if (replicates < 1) throw ConfigError("replicates", "expected a positive integer");
  cfg.replicates = static_cast<int>(replicates);
  cfg.horizon = int_or(doc, "", "horizon", 500);
  if (cfg.horizon < 1) throw ConfigError("horizon", "expected a positive integer");
  cfg.algorithm = parse_algorithm(require(doc, "", "algorithm"), "algorithm");

  const bool contextual = cfg.algorithm.kind == "ctx_reduction";
  if (contextual) {
    cfg.contextual_prior = parse_contextual_object(require(doc, "", "prior"), "prior");
    if (doc.contains("policies")) {
      cfg.policies = parse_policies(doc.at("policies"), "policies");
      for (const Policy& p : cfg.policies) {
        if (static_cast<int>(p.size()) != cfg.contextual_prior->num_contexts()) {
          throw ConfigError("policies", "each policy must cover every context");
        }
        for (const int arm : p) {
          if (arm >= cfg.contextual_prior->num_arms()) {
            throw ConfigError("policies", "policy arm exceeds the number of arms");
          }
        }
      }
    }
  } else {
    cfg.prior = parse_prior_object(require(doc, "", "prior"), "prior");
  }

  if (doc.contains("audit")) {
    const json& a = doc.at("audit");
    AuditSettings audit;
    audit.replicates = static_cast<int>(int_or(a, "audit", "replicates", 1000));
    audit.epsilon = number_or(a, "audit", "epsilon", 0.01);
    audit.min_cell = int_or(a, "audit", "min_cell", 200);
    audit.ci_level = number_or(a, "audit", "ci_level", 0.95);
    cfg.audit = audit;
  }
  if (doc.contains("constants")) {
    const json& c = doc.at("constants");
    ConstantsSettings constants;
    constants.k = int_or(c, "constants", "k", 1);
    constants.replicates = static_cast<int>(int_or(c, "constants", "replicates", 20000));
    cfg.constants = constants;
  }
  cfg.transcripts_to_write = static_cast<int>(int_or(doc, "", "transcripts", 3));
  if (cfg.transcripts_to_write < 0 || cfg.transcripts_to_write > cfg.replicates) {
    throw ConfigError("transcripts", "expected a count between 0 and replicates");
  }
  return cfg;
}

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("<file>", "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

PriorModel load_prior(const std::string& path) { return parse_prior(slurp(path)); }

ContextualPrior load_contextual_prior(const std::string& path) {
  return parse_contextual_prior(slurp(path));
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return parse_experiment_config(slurp(path));
}

std::string config_hash(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  static const char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[h & 0xF];
    h >>= 4;
  }
  return out;
}

}  // namespace bicex
