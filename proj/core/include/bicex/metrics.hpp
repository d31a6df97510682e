#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bicex/model.hpp"

namespace bicex {

struct RegretPoint {
  std::int64_t t = 0;
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

struct RegretCurve {
  std::vector<RegretPoint> points;
  int replicates = 0;
  double ci_level = 0.95;

  const RegretPoint& final_point() const;
  std::string to_csv() const;
};

/// Cumulative ex-post regret of one transcript against the given means:
/// T max_i mu_i minus the sum of played means.
double expost_regret(const Transcript& transcript, const MabInstance& instance);

/// Same, against the transcript's own recorded means.
double expost_regret(const Transcript& transcript);

/// Per-round cumulative regret averaged over replicates with a normal CI.
/// All transcripts must share one horizon.
RegretCurve bayes_regret(const std::vector<Transcript>& transcripts, double ci_level = 0.95);

/// Mean over replicates of the average played mean over rounds [from, to],
/// both 1-based inclusive.
double avg_reward_window(const std::vector<Transcript>& transcripts, std::int64_t from,
                         std::int64_t to);

/// True iff for every round t > c + L the reduction transcript's prediction
/// equals the wrapped run's prediction at round floor((t - c) / L). The
/// wrapped vector holds one entry per standalone round, recorded after that
/// round's observe call; the caller is responsible for seed coupling.
bool check_prediction_coupling(const Transcript& reduction,
                               const std::vector<std::optional<std::string>>& wrapped,
                               std::int64_t c, std::int64_t L);

}  // namespace bicex
