#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "bicex/audit.hpp"
#include "bicex/contextual.hpp"
#include "bicex/priors.hpp"

namespace bicex {

/// Validation failure with the dotted path of the offending field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Pipeline selector for one experiment. kind is one of: two_arm_sampler,
/// m_arm_sampler, reduction, detail_free, df_two_arm, standalone, ctx_reduction.
struct AlgorithmConfig {
  std::string kind;
  std::int64_t k = 1;
  std::int64_t L = 1;
  std::string wrapped = "ucb1";  // reduction and standalone
  double mu_hat = 0.0;           // detail_free
  std::int64_t N = 1;            // detail_free
  double tau = 0.1;              // detail_free
  std::optional<double> theta;   // detail_free and aae
  std::int64_t k_star = 1;       // df_two_arm
  double C = 0.0;                // df_two_arm
  double epsilon_greedy = 0.1;   // ctx_reduction wrapped learner
};

struct AuditSettings {
  int replicates = 1000;
  double epsilon = 0.01;
  std::int64_t min_cell = 200;
  double ci_level = 0.95;
};

struct ConstantsSettings {
  std::int64_t k = 1;
  int replicates = 20000;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::uint64_t seed = 2024;
  int replicates = 100;
  std::int64_t horizon = 500;
  AlgorithmConfig algorithm;
  std::optional<PriorModel> prior;
  std::optional<ContextualPrior> contextual_prior;
  PolicyClass policies;  // ctx_reduction wrapped learner and contextual regret
  std::optional<AuditSettings> audit;
  std::optional<ConstantsSettings> constants;
  int transcripts_to_write = 3;
  std::string raw_text;  // original config text, echoed into artifacts
};

/// Parsers throw ConfigError naming the field on any problem. The prior
/// parsers accept a standalone prior object; the experiment parser expects
/// the full document described in the README.
PriorModel parse_prior(const std::string& json_text);
ContextualPrior parse_contextual_prior(const std::string& json_text);
ExperimentConfig parse_experiment_config(const std::string& json_text);

PriorModel load_prior(const std::string& path);
ContextualPrior load_contextual_prior(const std::string& path);
ExperimentConfig load_experiment_config(const std::string& path);

/// FNV-1a hash of the config text, rendered as 16 hex digits; embedded in
/// SVG output as data provenance.
std::string config_hash(const std::string& text);

}  // namespace bicex
