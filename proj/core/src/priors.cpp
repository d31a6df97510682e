#include "bicex/priors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace bicex {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_bernoulli_stats(const ArmStats& st) {
  const double n = static_cast<double>(st.n);
  if (std::fabs(st.sum2 - st.sum) > 1e-6 || st.sum < -1e-9 || st.sum > n + 1e-9) {
    throw std::domain_error("posterior_mean: Bernoulli rewards outside {0, 1}");
  }
}

/// Log likelihood of an arm's observed rewards at latent mean mu, up to an
/// additive constant that does not depend on mu.
double loglik(const RewardFamily& fam, const ArmStats& st, double mu) {
  if (st.n == 0) return 0.0;
  switch (fam.kind) {
    case RewardFamily::Kind::bernoulli: {
      check_bernoulli_stats(st);
      const double s = st.sum;
      const double f = static_cast<double>(st.n) - st.sum;
      double ll = 0.0;
      if (s > 0.0) {
        if (mu <= 0.0) return kNegInf;
        ll += s * std::log(mu);
      }
      if (f > 0.0) {
        if (mu >= 1.0) return kNegInf;
        ll += f * std::log(1.0 - mu);
      }
      return ll;
    }
    case RewardFamily::Kind::gaussian: {
      if (fam.noise_var <= 0.0) {
        throw std::domain_error("posterior_mean: Gaussian rewards need positive noise variance");
      }
      const double n = static_cast<double>(st.n);
      return -(st.sum2 - 2.0 * mu * st.sum + n * mu * mu) / (2.0 * fam.noise_var);
    }
    case RewardFamily::Kind::point_mass:
      return std::fabs(st.mean() - mu) <= 1e-9 ? 0.0 : kNegInf;
  }
  throw std::logic_error("loglik: unknown reward family");
}

struct GridTables {
  std::vector<double> mu;
  std::vector<double> logw;
  std::vector<double> cum;  // cumulative weights for sampling
};

GridTables build_grid_tables(const ArmMarginal& m) {
  if (m.cells <= 0) throw std::invalid_argument("bounded_grid: cells must be positive");
  if (!(m.hi > m.lo)) throw std::invalid_argument("bounded_grid: need hi > lo");
  if (!m.weights.empty() && static_cast<int>(m.weights.size()) != m.cells) {
    throw std::invalid_argument("bounded_grid: weights size must match cells");
  }
  GridTables t;
  const std::size_t n = static_cast<std::size_t>(m.cells);
  t.mu.resize(n);
  t.logw.resize(n);
  t.cum.resize(n);
  const double width = (m.hi - m.lo) / static_cast<double>(m.cells);
  double total = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    t.mu[c] = m.lo + (static_cast<double>(c) + 0.5) * width;
    const double w = m.weights.empty() ? 1.0 : m.weights[c];
    if (w < 0.0) throw std::invalid_argument("bounded_grid: negative weight");
    total += w;
    t.cum[c] = total;
  }
  if (total <= 0.0) throw std::invalid_argument("bounded_grid: weights sum to zero");
  for (std::size_t c = 0; c < n; ++c) {
    const double w = m.weights.empty() ? 1.0 : m.weights[c];
    t.logw[c] = w > 0.0 ? std::log(w / total) : kNegInf;
    t.cum[c] /= total;
  }
  return t;
}

/// Grid tables are cached per marginal identity so repeated posterior calls
/// in a long run do not rebuild midpoint and log tables every phase.
const GridTables& grid_tables(const ArmMarginal& m) {
  thread_local std::vector<std::pair<const ArmMarginal*, GridTables>> cache;
  for (auto& entry : cache) {
    if (entry.first == &m) return entry.second;
  }
  if (cache.size() > 64) cache.clear();
  cache.emplace_back(&m, build_grid_tables(m));
  return cache.back().second;
}

double grid_posterior_mean(const ArmMarginal& m, const RewardFamily& fam,
                           const ArmStats& st) {
  if (fam.kind == RewardFamily::Kind::point_mass && st.n > 0) return st.mean();
  const GridTables& t = grid_tables(m);
  double best = kNegInf;
  const std::size_t n = t.mu.size();
  std::vector<double> ll(n);
  for (std::size_t c = 0; c < n; ++c) {
    ll[c] = t.logw[c] + loglik(fam, st, t.mu[c]);
    if (ll[c] > best) best = ll[c];
  }
  if (best == kNegInf) {
    throw std::runtime_error("posterior_mean: empty grid mass after weighting");
  }
  double wsum = 0.0, msum = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    const double w = std::exp(ll[c] - best);
    wsum += w;
    msum += w * t.mu[c];
  }
  return msum / wsum;
}

}  // namespace

double sample_marginal(const ArmMarginal& m, RngStream& rng) {
  switch (m.kind) {
    case ArmMarginal::Kind::gaussian:
      return rng.normal(m.mean, std::sqrt(m.variance));
    case ArmMarginal::Kind::beta_bernoulli:
      return rng.beta(m.alpha, m.beta);
    case ArmMarginal::Kind::bounded_grid: {
      const GridTables& t = grid_tables(m);
      const double u = rng.uniform();
      const auto it = std::upper_bound(t.cum.begin(), t.cum.end(), u);
      const std::size_t c = it == t.cum.end() ? t.cum.size() - 1
                                              : static_cast<std::size_t>(it - t.cum.begin());
      const double width = (m.hi - m.lo) / static_cast<double>(m.cells);
      const double cell_lo = m.lo + static_cast<double>(c) * width;
      return cell_lo + rng.uniform() * width;
    }
    case ArmMarginal::Kind::point_mass:
      return m.point;
  }
  throw std::logic_error("sample_marginal: unknown marginal kind");
}

double ArmMarginal::prior_mean() const {
  switch (kind) {
    case Kind::gaussian:
      return mean;
    case Kind::beta_bernoulli:
      return alpha / (alpha + beta);
    case Kind::bounded_grid: {
      const GridTables& t = grid_tables(*this);
      double s = 0.0;
      double prev = 0.0;
      for (std::size_t c = 0; c < t.mu.size(); ++c) {
        s += (t.cum[c] - prev) * t.mu[c];
        prev = t.cum[c];
      }
      return s;
    }
    case Kind::point_mass:
      return point;
  }
  throw std::logic_error("ArmMarginal::prior_mean: unknown kind");
}

ArmMarginal ArmMarginal::gaussian_prior(double mean, double variance) {
  if (variance <= 0.0) throw std::invalid_argument("gaussian_prior: variance must be positive");
  ArmMarginal m;
  m.kind = Kind::gaussian;
  m.mean = mean;
  m.variance = variance;
  return m;
}

ArmMarginal ArmMarginal::beta_prior(double alpha, double beta) {
  if (alpha <= 0.0 || beta <= 0.0) throw std::invalid_argument("beta_prior: parameters must be positive");
  ArmMarginal m;
  m.kind = Kind::beta_bernoulli;
  m.alpha = alpha;
  m.beta = beta;
  return m;
}

ArmMarginal ArmMarginal::grid_prior(double lo, double hi, int cells,
                                    std::vector<double> weights) {
  ArmMarginal m;
  m.kind = Kind::bounded_grid;
  m.lo = lo;
  m.hi = hi;
  m.cells = cells;
  m.weights = std::move(weights);
  build_grid_tables(m);  // validates eagerly
  return m;
}

ArmMarginal ArmMarginal::point_prior(double value) {
  ArmMarginal m;
  m.kind = Kind::point_mass;
  m.point = value;
  return m;
}

PriorModel::PriorModel(std::vector<ArmMarginal> arms, std::vector<RewardFamily> rewards,
                       Correlation correlation, std::vector<double> offsets)
    : arms_(std::move(arms)),
      rewards_(std::move(rewards)),
      correlation_(correlation),
      offsets_(std::move(offsets)) {
  if (correlation_ == Correlation::independent) {
    if (!offsets_.empty()) {
      throw std::invalid_argument("PriorModel: offsets require offset correlation");
    }
    num_arms_ = static_cast<int>(arms_.size());
  } else {
    if (arms_.size() != 1) {
      throw std::invalid_argument("PriorModel: offset correlation takes one base marginal");
    }
    num_arms_ = static_cast<int>(offsets_.size());
    if (num_arms_ < 2 || offsets_[0] != 0.0) {
      throw std::invalid_argument("PriorModel: offsets must start at 0 and cover >= 2 arms");
    }
  }
  if (num_arms_ < 2) throw std::invalid_argument("PriorModel: need at least two arms");
  if (static_cast<int>(rewards_.size()) != num_arms_) {
    throw std::invalid_argument("PriorModel: one reward family per arm required");
  }
  for (int i = 0; i + 1 < num_arms_; ++i) {
    if (prior_mean(i) < prior_mean(i + 1) - 1e-12) {
      throw std::invalid_argument("PriorModel: prior means must be non-increasing over arms");
    }
  }
  input_labels_.resize(static_cast<std::size_t>(num_arms_));
  for (int i = 0; i < num_arms_; ++i) input_labels_[static_cast<std::size_t>(i)] = i;
}

PriorModel PriorModel::relabeled(std::vector<ArmMarginal> arms,
                                 std::vector<RewardFamily> rewards) {
  if (arms.size() != rewards.size()) {
    throw std::invalid_argument("PriorModel::relabeled: one reward family per arm required");
  }
  std::vector<int> order(arms.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return arms[static_cast<std::size_t>(a)].prior_mean() >
           arms[static_cast<std::size_t>(b)].prior_mean();
  });
  std::vector<ArmMarginal> sorted_arms;
  std::vector<RewardFamily> sorted_rewards;
  sorted_arms.reserve(arms.size());
  sorted_rewards.reserve(rewards.size());
  for (int idx : order) {
    sorted_arms.push_back(std::move(arms[static_cast<std::size_t>(idx)]));
    sorted_rewards.push_back(rewards[static_cast<std::size_t>(idx)]);
  }
  PriorModel model(std::move(sorted_arms), std::move(sorted_rewards));
  model.input_labels_ = order;
  return model;
}

double PriorModel::prior_mean(int arm) const {
  if (arm < 0 || arm >= num_arms_) throw std::out_of_range("PriorModel::prior_mean: bad arm");
  if (correlation_ == Correlation::offset) {
    return arms_[0].prior_mean() - offsets_[static_cast<std::size_t>(arm)];
  }
  return arms_[static_cast<std::size_t>(arm)].prior_mean();
}

const ArmMarginal& PriorModel::marginal(int arm) const {
  if (correlation_ == Correlation::offset) return arms_.at(0);
  return arms_.at(static_cast<std::size_t>(arm));
}

bool PriorModel::deterministic() const {
  for (const auto& a : arms_) {
    if (a.kind != ArmMarginal::Kind::point_mass) return false;
  }
  return true;
}

double posterior_mean(const PriorModel& prior, const Dataset& data, int arm,
                      const PosteriorOptions& opts, PosteriorDiag* diag) {
  if (arm < 0 || arm >= prior.num_arms()) {
    throw std::out_of_range("posterior_mean: bad arm");
  }
  if (static_cast<int>(data.arms.size()) != prior.num_arms()) {
    throw std::invalid_argument("posterior_mean: dataset shape does not match prior");
  }
  if (diag != nullptr) *diag = PosteriorDiag{};

  if (prior.correlation() == Correlation::offset) {
    // Joint posterior via self-normalized importance sampling with the base
    // marginal as proposal; weights use every arm's observations.
    RngStream rng(opts.sampler_seed);
    const ArmMarginal& base = prior.marginal(0);
    const int m = prior.num_arms();
    double best = kNegInf;
    std::vector<double> ll(static_cast<std::size_t>(opts.importance_draws));
    std::vector<double> mu0(static_cast<std::size_t>(opts.importance_draws));
    for (int d = 0; d < opts.importance_draws; ++d) {
      const double b = sample_marginal(base, rng);
      mu0[static_cast<std::size_t>(d)] = b;
      double l = 0.0;
      for (int j = 0; j < m; ++j) {
        const double mu_j = b - prior.offsets()[static_cast<std::size_t>(j)];
        l += loglik(prior.reward(j), data.arms[static_cast<std::size_t>(j)], mu_j);
      }
      ll[static_cast<std::size_t>(d)] = l;
      if (l > best) best = l;
    }
    if (best == kNegInf) {
      throw std::runtime_error("posterior_mean: importance weights vanished");
    }
    double wsum = 0.0, w2sum = 0.0, msum = 0.0;
    for (int d = 0; d < opts.importance_draws; ++d) {
      const double w = std::exp(ll[static_cast<std::size_t>(d)] - best);
      wsum += w;
      w2sum += w * w;
      msum += w * (mu0[static_cast<std::size_t>(d)] -
                   prior.offsets()[static_cast<std::size_t>(arm)]);
    }
    if (diag != nullptr) {
      diag->ess = wsum * wsum / w2sum;
      diag->degenerate = diag->ess < opts.min_ess;
    }
    return msum / wsum;
  }

  return marginal_posterior_mean(prior.marginal(arm), prior.reward(arm),
                                 data.arms[static_cast<std::size_t>(arm)]);
}

double marginal_posterior_mean(const ArmMarginal& m, const RewardFamily& fam,
                               const ArmStats& st) {
  switch (m.kind) {
    case ArmMarginal::Kind::gaussian: {
      if (st.n == 0) return m.mean;
      if (fam.kind == RewardFamily::Kind::point_mass) return st.mean();
      if (fam.kind != RewardFamily::Kind::gaussian) {
        throw std::invalid_argument(
            "posterior_mean: gaussian marginal requires gaussian or point rewards");
      }
      const double prior_prec = 1.0 / m.variance;
      const double obs_prec = static_cast<double>(st.n) / fam.noise_var;
      return (prior_prec * m.mean + st.sum / fam.noise_var) / (prior_prec + obs_prec);
    }
    case ArmMarginal::Kind::beta_bernoulli: {
      if (st.n == 0) return m.prior_mean();
      if (fam.kind != RewardFamily::Kind::bernoulli) {
        throw std::invalid_argument(
            "posterior_mean: beta_bernoulli marginal requires bernoulli rewards");
      }
      check_bernoulli_stats(st);
      return (m.alpha + st.sum) / (m.alpha + m.beta + static_cast<double>(st.n));
    }
    case ArmMarginal::Kind::bounded_grid:
      if (st.n == 0) return m.prior_mean();
      return grid_posterior_mean(m, fam, st);
    case ArmMarginal::Kind::point_mass:
      return m.point;
  }
  throw std::logic_error("marginal_posterior_mean: unknown marginal kind");
}

MabInstance sample_instance(const PriorModel& prior, RngStream& rng) {
  MabInstance inst;
  const int m = prior.num_arms();
  inst.means.resize(static_cast<std::size_t>(m));
  if (prior.correlation() == Correlation::offset) {
    const double base = sample_marginal(prior.marginal(0), rng);
    for (int i = 0; i < m; ++i) {
      inst.means[static_cast<std::size_t>(i)] = base - prior.offsets()[static_cast<std::size_t>(i)];
    }
  } else {
    for (int i = 0; i < m; ++i) {
      inst.means[static_cast<std::size_t>(i)] = sample_marginal(prior.marginal(i), rng);
    }
  }
  return inst;
}

Environment make_environment(const PriorModel& prior, RngStream& instance_rng) {
  return Environment{sample_instance(prior, instance_rng), prior.rewards()};
}

XkDistribution xk_distribution(const PriorModel& prior, std::int64_t k) {
  if (prior.num_arms() != 2 || prior.correlation() != Correlation::independent) {
    throw std::invalid_argument("xk_distribution: needs two independent arms");
  }
  const ArmMarginal& a0 = prior.marginal(0);
  const ArmMarginal& a1 = prior.marginal(1);
  if (a0.kind != ArmMarginal::Kind::gaussian || a1.kind != ArmMarginal::Kind::gaussian) {
    throw std::invalid_argument("xk_distribution: needs gaussian marginals");
  }
  if (prior.reward(0).kind != RewardFamily::Kind::gaussian) {
    throw std::invalid_argument("xk_distribution: needs gaussian rewards on arm 1");
  }
  if (k < 0) throw std::invalid_argument("xk_distribution: k must be >= 0");
  XkDistribution out;
  out.mean = a1.mean - a0.mean;
  if (k == 0) {
    out.variance = 0.0;
    return out;
  }
  const double s2 = a0.variance;
  const double r2 = prior.reward(0).noise_var;
  const double kk = static_cast<double>(k);
  out.variance = s2 * (kk * s2) / (r2 + kk * s2);
  return out;
}

}  // namespace bicex
