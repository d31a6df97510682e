#include "bicex/constants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bicex/parallel.hpp"
#include "bicex/stats.hpp"

namespace bicex {

std::vector<double> tau_grid() {
  std::vector<double> grid(kTauGridSize);
  for (int g = 0; g < kTauGridSize; ++g) {
    const double frac = static_cast<double>(g) / (kTauGridSize - 1);
    grid[static_cast<std::size_t>(g)] = std::pow(10.0, -3.0 * (1.0 - frac));
  }
  return grid;
}

namespace {

std::int64_t ceil_to_int(double x) {
  const double c = std::ceil(x);
  if (!(c >= -9.2e18 && c <= 9.2e18)) {
    throw std::overflow_error("threshold does not fit in an integer");
  }
  return static_cast<std::int64_t>(c);
}

struct MeanAcc {
  double sum = 0.0;
  double sum2 = 0.0;
  std::int64_t n = 0;
  void add(double v) {
    sum += v;
    sum2 += v * v;
    ++n;
  }
};

IntervalEstimate interval_from(const MeanAcc& acc, double z) {
  IntervalEstimate est;
  const double n = static_cast<double>(acc.n);
  est.point = acc.sum / n;
  const double var = std::max(0.0, (acc.sum2 - acc.sum * acc.sum / n) / (n - 1.0));
  const double se = std::sqrt(var / n);
  est.lcb = est.point - z * se;
  est.ucb = est.point + z * se;
  return est;
}

IntervalEstimate wilson_interval(std::int64_t hits, std::int64_t n, double z) {
  IntervalEstimate est;
  est.point = static_cast<double>(hits) / static_cast<double>(n);
  est.lcb = wilson_lower(hits, n, z);
  est.ucb = wilson_upper(hits, n, z);
  return est;
}

using Predicate = std::function<bool(const MabInstance&)>;

IntervalEstimate mc_event_probability(const PriorModel& prior, const Predicate& pred,
                                      int replicates, double ci_level, std::uint64_t seed,
                                      const char* tag) {
  if (replicates < 1) throw std::invalid_argument("event probability: replicates must be >= 1");
  auto build = [&](std::int64_t lo, std::int64_t hi) {
    std::int64_t hits = 0;
    for (std::int64_t r = lo; r < hi; ++r) {
      RngStream rng = RngStream::derive(seed, static_cast<std::uint64_t>(r), tag, 0);
      if (pred(sample_instance(prior, rng))) ++hits;
    }
    return hits;
  };
  auto merge = [](std::int64_t& into, std::int64_t&& part) { into += part; };
  const std::int64_t hits = parallel_reduce<std::int64_t>(replicates, build, merge);
  return wilson_interval(hits, replicates, z_for_confidence(ci_level));
}

/// X_i given the samples currently in data (arms before i), as the minimum
/// posterior-mean advantage of arm i over every other arm.
double persuasion_statistic(const PriorModel& prior, const Dataset& data, int arm) {
  const double own = posterior_mean(prior, data, arm);
  double rival = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < prior.num_arms(); ++j) {
    if (j == arm) continue;
    rival = std::max(rival, posterior_mean(prior, data, j));
  }
  return own - rival;
}

}  // namespace

PersuasionConstants estimate_persuasion_constants(const PriorModel& prior, std::int64_t k,
                                                  int replicates, double ci_level,
                                                  std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("estimate_persuasion_constants: k must be >= 1");
  if (replicates < 1000) {
    throw std::invalid_argument("estimate_persuasion_constants: replicates must be >= 1000");
  }
  const int m = prior.num_arms();
  const std::vector<double> grid = tau_grid();

  auto build = [&](std::int64_t lo, std::int64_t hi) {
    std::vector<std::int64_t> counts(static_cast<std::size_t>(m) * kTauGridSize, 0);
    for (std::int64_t r = lo; r < hi; ++r) {
      RngStream rng = RngStream::derive(seed, static_cast<std::uint64_t>(r), "persuasion", 0);
      const MabInstance inst = sample_instance(prior, rng);
      Dataset data(m);
      for (int i = 0; i < m; ++i) {
        const double x = persuasion_statistic(prior, data, i);
        for (int g = 0; g < kTauGridSize; ++g) {
          if (x > grid[static_cast<std::size_t>(g)]) {
            ++counts[static_cast<std::size_t>(i) * kTauGridSize + static_cast<std::size_t>(g)];
          }
        }
        if (i + 1 < m) {
          for (std::int64_t s = 0; s < k; ++s) {
            data.add(i, draw_reward(prior.reward(i), inst.means[static_cast<std::size_t>(i)], rng));
          }
        }
      }
    }
    return counts;
  };
  auto merge = [](std::vector<std::int64_t>& into, std::vector<std::int64_t>&& part) {
    for (std::size_t t = 0; t < into.size(); ++t) into[t] += part[t];
  };
  const std::vector<std::int64_t> counts =
      parallel_reduce<std::vector<std::int64_t>>(replicates, build, merge);

  const double z = z_for_confidence(ci_level);
  PersuasionConstants out;
  out.k_p = k;
  out.replicates = replicates;
  out.ci_level = ci_level;
  out.tau_p = std::numeric_limits<double>::infinity();
  out.rho_p = std::numeric_limits<double>::infinity();
  for (int i = 0; i < m; ++i) {
    ArmPersuasion row;
    row.arm = i;
    row.curve.resize(kTauGridSize);
    double best_score = 0.0;
    double max_ucb = 0.0;
    for (int g = 0; g < kTauGridSize; ++g) {
      const std::int64_t hits =
          counts[static_cast<std::size_t>(i) * kTauGridSize + static_cast<std::size_t>(g)];
      TauGridPoint& pt = row.curve[static_cast<std::size_t>(g)];
      pt.tau = grid[static_cast<std::size_t>(g)];
      pt.rho_hat = static_cast<double>(hits) / static_cast<double>(replicates);
      pt.rho_lcb = wilson_lower(hits, replicates, z);
      pt.rho_ucb = wilson_upper(hits, replicates, z);
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
    if (i >= 1) {
      if (!row.feasible) {
        const std::string which = "arm " + std::to_string(i + 1);
        if (max_ucb < 1e-4) {
          throw PriorNotPersuadable(which + " has vanishing exceedance probability");
        }
        throw PriorNotPersuadable(which +
                                  " exceedance is inconclusive at this replicate budget");
      }
      out.tau_p = std::min(out.tau_p, row.tau_star);
      out.rho_p = std::min(out.rho_p, row.rho_lcb);
    }
    out.per_arm.push_back(std::move(row));
  }
  return out;
}

IntervalEstimate expected_max_mean(const PriorModel& prior, int replicates, double ci_level,
                                   std::uint64_t seed) {
  if (prior.deterministic()) {
    double best = prior.prior_mean(0);
    for (int i = 1; i < prior.num_arms(); ++i) best = std::max(best, prior.prior_mean(i));
    return IntervalEstimate{best, best, best};
  }
  if (replicates < 2) throw std::invalid_argument("expected_max_mean: replicates must be >= 2");
  auto build = [&](std::int64_t lo, std::int64_t hi) {
    MeanAcc acc;
    for (std::int64_t r = lo; r < hi; ++r) {
      RngStream rng = RngStream::derive(seed, static_cast<std::uint64_t>(r), "maxmean", 0);
      const MabInstance inst = sample_instance(prior, rng);
      acc.add(*std::max_element(inst.means.begin(), inst.means.end()));
    }
    return acc;
  };
  auto merge = [](MeanAcc& into, MeanAcc&& part) {
    into.sum += part.sum;
    into.sum2 += part.sum2;
    into.n += part.n;
  };
  return interval_from(parallel_reduce<MeanAcc>(replicates, build, merge),
                       z_for_confidence(ci_level));
}

IntervalEstimate exploration_gain_two_arm(const PriorModel& prior, std::int64_t k_p,
                                          int replicates, double ci_level, std::uint64_t seed) {
  if (prior.num_arms() != 2) {
    throw std::invalid_argument("exploration_gain_two_arm: needs exactly two arms");
  }
  if (k_p < 1) throw std::invalid_argument("exploration_gain_two_arm: k_p must be >= 1");

  const bool closed_form = prior.correlation() == Correlation::independent &&
                           prior.marginal(0).kind == ArmMarginal::Kind::gaussian &&
                           prior.marginal(1).kind == ArmMarginal::Kind::gaussian &&
                           prior.reward(0).kind == RewardFamily::Kind::gaussian;
  if (closed_form) {
    const XkDistribution xk = xk_distribution(prior, k_p);
    const double gain = truncated_gaussian_positive_mean(xk.mean, std::sqrt(xk.variance));
    return IntervalEstimate{gain, gain, gain};
  }

  if (replicates < 2) {
    throw std::invalid_argument("exploration_gain_two_arm: replicates must be >= 2");
  }
  auto build = [&](std::int64_t lo, std::int64_t hi) {
    MeanAcc acc;
    for (std::int64_t r = lo; r < hi; ++r) {
      RngStream rng = RngStream::derive(seed, static_cast<std::uint64_t>(r), "gain", 0);
      const MabInstance inst = sample_instance(prior, rng);
      Dataset data(2);
      for (std::int64_t s = 0; s < k_p; ++s) {
        data.add(0, draw_reward(prior.reward(0), inst.means[0], rng));
      }
      const double y = posterior_mean(prior, data, 1) - posterior_mean(prior, data, 0);
      acc.add(std::max(y, 0.0));
    }
    return acc;
  };
  auto merge = [](MeanAcc& into, MeanAcc&& part) {
    into.sum += part.sum;
    into.sum2 += part.sum2;
    into.n += part.n;
  };
  return interval_from(parallel_reduce<MeanAcc>(replicates, build, merge),
                       z_for_confidence(ci_level));
}

std::int64_t min_phase_length_two_arm(const PriorModel& prior, std::int64_t k_p,
                                      int replicates, double ci_level, std::uint64_t seed) {
  if (prior.num_arms() != 2) {
    throw std::invalid_argument("min_phase_length_two_arm: needs exactly two arms");
  }
  if (k_p < 1) throw std::invalid_argument("min_phase_length_two_arm: k_p must be >= 1");
  const double gap = prior.prior_mean(0) - prior.prior_mean(1);
  if (gap <= 0.0) return std::max<std::int64_t>(k_p, 1);
  const IntervalEstimate gain =
      exploration_gain_two_arm(prior, k_p, replicates, ci_level, seed);
  if (gain.lcb <= 0.0) {
    throw PriorNotPersuadable("exploration gain is not positive at this confidence level");
  }
  return ceil_to_int(std::max(static_cast<double>(k_p), 1.0 + gap / gain.lcb));
}

std::int64_t min_phase_length_m_arm(const PriorModel& prior,
                                    const PersuasionConstants& constants, int replicates,
                                    double ci_level, std::uint64_t seed) {
  const double tau_rho = constants.tau_p * constants.rho_p;
  if (!(tau_rho > 0.0)) {
    throw PriorNotPersuadable("tau_p * rho_p must be positive");
  }
  const IntervalEstimate max_mean = expected_max_mean(prior, replicates, ci_level, seed);
  const double mu_m0 = prior.prior_mean(prior.num_arms() - 1);
  return ceil_to_int(2.0 + (max_mean.ucb - mu_m0) / tau_rho);
}

DetailFreeThresholds detail_free_thresholds(const DetailFreeInputs& in) {
  if (in.m < 2) throw std::invalid_argument("detail_free_thresholds: m must be >= 2");
  if (!(in.mu_m0 > 0.0)) {
    throw std::invalid_argument("detail_free_thresholds: mu_m0 must be positive");
  }
  if (!(in.lambda > 0.0 && in.lambda < 2.0 / 3.0)) {
    throw std::invalid_argument("detail_free_thresholds: lambda must lie in (0, 2/3)");
  }
  if (in.mean_gap < 0.0) {
    throw std::invalid_argument("detail_free_thresholds: mean_gap must be >= 0");
  }
  if (in.T < 1) throw std::invalid_argument("detail_free_thresholds: T must be >= 1");
  if (!(in.tau > 0.0)) throw std::invalid_argument("detail_free_thresholds: tau must be positive");
  if (in.prior_cdf_point < 0.0 || in.prior_cdf_point > 1.0 || in.racing_min_prob < 0.0 ||
      in.racing_min_prob > 1.0) {
    throw std::invalid_argument("detail_free_thresholds: probabilities must lie in [0, 1]");
  }
  if (in.prior_cdf_point <= 0.0) {
    throw PriorNotPersuadable("persuasion event has zero probability");
  }
  if (in.racing_min_prob <= 0.0) {
    throw PriorNotPersuadable("racing margin event has zero probability");
  }

  DetailFreeThresholds out;
  out.C = in.lambda * in.mu_m0;
  if (in.m == 2) {
    const double beta = out.C * in.prior_cdf_point;
    out.k = ceil_to_int(2.0 / (out.C * out.C) * std::log(4.0 / beta));
    out.L = ceil_to_int(1.0 + 8.0 * in.mean_gap / beta);
  } else {
    if (!(out.C < in.mu_m0 / 3.0)) {
      throw std::invalid_argument(
          "detail_free_thresholds: m-arm blocks need C < mu_m0 / 3 (lambda < 1/3)");
    }
    const double denom = out.C * in.prior_cdf_point;
    out.k = ceil_to_int(8.0 / (out.C * out.C) *
                        std::log(8.0 * static_cast<double>(in.m) / denom));
    out.L = ceil_to_int(1.0 + 2.0 * in.mean_gap / denom);
  }
  out.theta = (4.0 / in.tau) / in.racing_min_prob;
  out.k_race = ceil_to_int(out.theta * out.theta * std::log(static_cast<double>(in.T)));
  out.n_p = std::max({out.k, out.L, ceil_to_int(out.theta), out.k_race});
  return out;
}

std::int64_t chernoff_required_k(double C, double zeta, double kappa, double tail_prob) {
  if (!(C > 0.0 && C < 1.0) || !(zeta > 0.0 && zeta < 1.0) || !(kappa > 0.0 && kappa < 1.0)) {
    throw std::invalid_argument("chernoff_required_k: C, zeta, kappa must lie in (0, 1)");
  }
  if (!(tail_prob > 0.0 && tail_prob <= 1.0)) {
    throw std::invalid_argument("chernoff_required_k: tail_prob must lie in (0, 1]");
  }
  const double arg = kappa * (1.0 - zeta) * C * tail_prob;
  return ceil_to_int(-std::log(arg) / (2.0 * zeta * zeta * C * C));
}

double hoeffding_tail(std::int64_t n, double delta) {
  if (n < 0) throw std::invalid_argument("hoeffding_tail: n must be >= 0");
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw std::invalid_argument("hoeffding_tail: delta must lie in (0, 1]");
  }
  return 2.0 * std::exp(-2.0 * static_cast<double>(n) * delta * delta);
}

IntervalEstimate two_arm_event_probability(const PriorModel& prior, double lambda,
                                           int replicates, double ci_level,
                                           std::uint64_t seed) {
  if (prior.num_arms() != 2) {
    throw std::invalid_argument("two_arm_event_probability: needs exactly two arms");
  }
  if (!(lambda > 0.0 && lambda < 2.0 / 3.0)) {
    throw std::invalid_argument("two_arm_event_probability: lambda must lie in (0, 2/3)");
  }
  const double threshold = prior.prior_mean(1) * (1.0 - 1.5 * lambda);
  return mc_event_probability(
      prior, [threshold](const MabInstance& inst) { return inst.means[0] <= threshold; },
      replicates, ci_level, seed, "event2");
}

IntervalEstimate m_arm_event_probability(const PriorModel& prior, double C, int replicates,
                                         double ci_level, std::uint64_t seed) {
  if (!(C > 0.0)) throw std::invalid_argument("m_arm_event_probability: C must be positive");
  const int m = prior.num_arms();
  if (m == 2) return IntervalEstimate{1.0, 1.0, 1.0};
  const double hi = prior.prior_mean(m - 1) - 1.5 * C;
  return mc_event_probability(
      prior,
      [C, m, hi](const MabInstance& inst) {
        for (int j = 1; j + 1 < m; ++j) {
          const double mu_j = inst.means[static_cast<std::size_t>(j)];
          if (mu_j < inst.means[0] + 1.5 * C || mu_j > hi) return false;
        }
        return true;
      },
      replicates, ci_level, seed, "eventm");
}

IntervalEstimate racing_min_probability(const PriorModel& prior, double tau, int replicates,
                                        double ci_level, std::uint64_t seed) {
  if (!(tau > 0.0)) throw std::invalid_argument("racing_min_probability: tau must be positive");
  if (replicates < 1) {
    throw std::invalid_argument("racing_min_probability: replicates must be >= 1");
  }
  const int m = prior.num_arms();
  auto build = [&](std::int64_t lo, std::int64_t hi) {
    std::vector<std::int64_t> hits(static_cast<std::size_t>(m), 0);
    for (std::int64_t r = lo; r < hi; ++r) {
      RngStream rng = RngStream::derive(seed, static_cast<std::uint64_t>(r), "race-prob", 0);
      const MabInstance inst = sample_instance(prior, rng);
      for (int i = 0; i < m; ++i) {
        double rival = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < m; ++j) {
          if (j != i) rival = std::max(rival, inst.means[static_cast<std::size_t>(j)]);
        }
        if (inst.means[static_cast<std::size_t>(i)] - rival >= tau) {
          ++hits[static_cast<std::size_t>(i)];
        }
      }
    }
    return hits;
  };
  auto merge = [](std::vector<std::int64_t>& into, std::vector<std::int64_t>&& part) {
    for (std::size_t t = 0; t < into.size(); ++t) into[t] += part[t];
  };
  const std::vector<std::int64_t> hits =
      parallel_reduce<std::vector<std::int64_t>>(replicates, build, merge);
  const double z = z_for_confidence(ci_level);
  IntervalEstimate out{1.0, 1.0, 1.0};
  for (int i = 0; i < m; ++i) {
    const IntervalEstimate e = wilson_interval(hits[static_cast<std::size_t>(i)], replicates, z);
    out.point = std::min(out.point, e.point);
    out.lcb = std::min(out.lcb, e.lcb);
    out.ucb = std::min(out.ucb, e.ucb);
  }
  return out;
}

}  // namespace bicex
