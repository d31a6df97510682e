#include "bicex/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "bicex/stats.hpp"

namespace bicex {

const RegretPoint& RegretCurve::final_point() const {
  if (points.empty()) throw std::logic_error("empty regret curve");
  return points.back();
}

std::string RegretCurve::to_csv() const {
  std::ostringstream out;
  out << "t,mean,lo,hi\n";
  for (const RegretPoint& p : points) {
    out << p.t << ',' << format_double(p.mean) << ',' << format_double(p.lo) << ','
        << format_double(p.hi) << '\n';
  }
  return out.str();
}

double expost_regret(const Transcript& transcript, const MabInstance& instance) {
  if (transcript.num_contexts > 1) {
    throw std::invalid_argument("expost_regret is defined for single-context transcripts");
  }
  const double best = instance.best_mean();
  double played = 0.0;
  for (const TranscriptRow& row : transcript.rows) {
    played += instance.means.at(static_cast<std::size_t>(row.arm));
  }
  return best * static_cast<double>(transcript.rows.size()) - played;
}

double expost_regret(const Transcript& transcript) {
  MabInstance instance;
  instance.means = transcript.means;
  return expost_regret(transcript, instance);
}

RegretCurve bayes_regret(const std::vector<Transcript>& transcripts, double ci_level) {
  if (transcripts.empty()) throw std::invalid_argument("bayes_regret needs transcripts");
  const std::size_t horizon = transcripts.front().rows.size();
  for (const Transcript& t : transcripts) {
    if (t.rows.size() != horizon) {
      throw std::invalid_argument("bayes_regret transcripts must share the horizon");
    }
    if (t.num_contexts > 1) {
      throw std::invalid_argument("bayes_regret is defined for single-context transcripts");
    }
  }

  std::vector<double> sum(horizon, 0.0);
  std::vector<double> sum2(horizon, 0.0);
  for (const Transcript& t : transcripts) {
    const double best = *std::max_element(t.means.begin(), t.means.end());
    double cum = 0.0;
    for (std::size_t s = 0; s < horizon; ++s) {
      cum += best - t.means.at(static_cast<std::size_t>(t.rows[s].arm));
      sum[s] += cum;
      sum2[s] += cum * cum;
    }
  }

  RegretCurve curve;
  curve.replicates = static_cast<int>(transcripts.size());
  curve.ci_level = ci_level;
  const double n = static_cast<double>(transcripts.size());
  const double z = z_for_confidence(ci_level);
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

double avg_reward_window(const std::vector<Transcript>& transcripts, std::int64_t from,
                         std::int64_t to) {
  if (transcripts.empty()) throw std::invalid_argument("avg_reward_window needs transcripts");
  if (from < 1 || to < from) throw std::invalid_argument("avg_reward_window: empty window");
  double total = 0.0;
  for (const Transcript& t : transcripts) {
    if (to > static_cast<std::int64_t>(t.rows.size())) {
      throw std::invalid_argument("avg_reward_window: window exceeds the horizon");
    }
    double played = 0.0;
    for (std::int64_t s = from - 1; s < to; ++s) {
      const TranscriptRow& row = t.rows[static_cast<std::size_t>(s)];
      played += t.mean_of(row.arm, row.context);
    }
    total += played / static_cast<double>(to - from + 1);
  }
  return total / static_cast<double>(transcripts.size());
}

bool check_prediction_coupling(const Transcript& reduction,
                               const std::vector<std::optional<std::string>>& wrapped,
                               std::int64_t c, std::int64_t L) {
  if (c < 0 || L < 1) throw std::invalid_argument("check_prediction_coupling: bad c or L");
  for (const TranscriptRow& row : reduction.rows) {
    if (row.round <= c + L) continue;
    const std::int64_t phase = (row.round - c) / L;
    if (phase < 1 || phase > static_cast<std::int64_t>(wrapped.size())) {
      throw std::invalid_argument("check_prediction_coupling: wrapped run too short");
    }
    const std::string got = row.prediction.value_or(std::string(kNullPrediction));
    const std::string want =
        wrapped[static_cast<std::size_t>(phase - 1)].value_or(std::string(kNullPrediction));
    if (got != want) return false;
  }
  return true;
}

}  // namespace bicex
