#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bicex/audit.hpp"
#include "bicex/config.hpp"
#include "bicex/metrics.hpp"

namespace bicex {

struct ExperimentResult {
  std::string out_dir;
  bool audit_ran = false;
  bool audit_pass = true;
  RegretPoint final_regret;
  std::vector<std::string> files;  // paths written, relative to out_dir
};

/// Per-replicate transcript function shared by the experiment driver, the
/// audit, and the tests. Replicate r derives every stream from (seed, r), so
/// two runners built from equal configs produce identical transcripts.
TranscriptRunner make_transcript_runner(const ExperimentConfig& cfg);

/// Mean cumulative regret across cfg.replicates runs with a 95% CI, streamed
/// so arbitrarily many replicates fit in memory. Plain bandit runs compare
/// against the best fixed arm of each realized instance; contextual runs
/// against the best policy in the configured class.
RegretCurve experiment_regret_curve(const ExperimentConfig& cfg, int threads = 0);

/// Runs the configured experiment and writes its artifacts under out_dir:
/// the config echo, sample transcripts, the regret curve as csv and svg,
/// optional persuasion constants, and the optional audit report as json and
/// svg. Reruns with the same config are byte-identical.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                                int threads = 0);

}  // namespace bicex
