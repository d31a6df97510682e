#include "bicex/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bicex {

namespace {

int empirical_best(const std::vector<std::int64_t>& counts, const std::vector<double>& sums) {
  int best = -1;
  double best_mean = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] == 0) continue;
    const double mean = sums[i] / static_cast<double>(counts[i]);
    if (mean > best_mean) {
      best_mean = mean;
      best = static_cast<int>(i);
    }
  }
  return best;
}

std::optional<std::string> arm_token(int arm) {
  if (arm < 0) return std::nullopt;
  return std::to_string(arm + 1);
}

class Ucb1 final : public BanditAlgorithm {
 public:
  explicit Ucb1(int num_arms)
      : counts_(static_cast<std::size_t>(num_arms), 0),
        sums_(static_cast<std::size_t>(num_arms), 0.0) {
    if (num_arms < 1) throw std::invalid_argument("ucb1: need at least one arm");
  }

  int next_arm() override {
    for (std::size_t i = 0; i < counts_.size(); ++i) {
      if (counts_[i] == 0) return static_cast<int>(i);
    }
    const double t = static_cast<double>(rounds_ + 1);
    int best = 0;
    double best_index = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < counts_.size(); ++i) {
      const double n = static_cast<double>(counts_[i]);
      const double index = sums_[i] / n + std::sqrt(2.0 * std::log(t) / n);
      if (index > best_index) {
        best_index = index;
        best = static_cast<int>(i);
      }
    }
    return best;
  }

  void observe(int arm, double reward, const std::optional<std::string>&) override {
    counts_.at(static_cast<std::size_t>(arm)) += 1;
    sums_.at(static_cast<std::size_t>(arm)) += reward;
    ++rounds_;
  }

  std::optional<std::string> predict() const override {
    return arm_token(empirical_best(counts_, sums_));
  }

 private:
  std::vector<std::int64_t> counts_;
  std::vector<double> sums_;
  std::int64_t rounds_ = 0;
};

class ActiveArmsElimination final : public BanditAlgorithm {
 public:
  ActiveArmsElimination(int num_arms, std::int64_t T, double theta, const Dataset& initial)
      : log_t_theta_(std::log(static_cast<double>(T) * theta)),
        counts_(static_cast<std::size_t>(num_arms), 0),
        sums_(static_cast<std::size_t>(num_arms), 0.0) {
    if (num_arms < 1) throw std::invalid_argument("active_arms_elimination: need arms");
    if (T < 1 || !(theta >= 1.0)) {
      throw std::invalid_argument("active_arms_elimination: need T >= 1 and theta >= 1");
    }
    if (!initial.arms.empty()) {
      if (static_cast<int>(initial.arms.size()) != num_arms) {
        throw std::invalid_argument("active_arms_elimination: initial stats shape mismatch");
      }
      for (std::size_t i = 0; i < initial.arms.size(); ++i) {
        counts_[i] = initial.arms[i].n;
        sums_[i] = initial.arms[i].sum;
      }
    }
    for (int i = 0; i < num_arms; ++i) active_.push_back(i);
    recompute_active();
  }

  int next_arm() override {
    if (active_.size() == 1) return active_[0];
    return active_[cursor_];
  }

  void observe(int arm, double reward, const std::optional<std::string>&) override {
    counts_.at(static_cast<std::size_t>(arm)) += 1;
    sums_.at(static_cast<std::size_t>(arm)) += reward;
    if (active_.size() == 1) return;
    ++cursor_;
    if (cursor_ == active_.size()) {
      cursor_ = 0;
      recompute_active();
    }
  }

  std::optional<std::string> predict() const override {
    return arm_token(empirical_best(counts_, sums_));
  }

  const std::vector<int>& active() const { return active_; }

 private:
  void recompute_active() {
    std::int64_t n = std::numeric_limits<std::int64_t>::max();
    for (int a : active_) n = std::min(n, counts_[static_cast<std::size_t>(a)]);
    if (n < 1) return;
    const double c_n = std::sqrt(log_t_theta_ / static_cast<double>(n));
    double leader = -std::numeric_limits<double>::infinity();
    for (int a : active_) {
      leader = std::max(leader, sums_[static_cast<std::size_t>(a)] /
                                    static_cast<double>(counts_[static_cast<std::size_t>(a)]));
    }
    std::vector<int> next;
    for (int a : active_) {
      const double mean =
          sums_[static_cast<std::size_t>(a)] / static_cast<double>(counts_[static_cast<std::size_t>(a)]);
      if (leader - mean <= c_n) next.push_back(a);
    }
    active_ = std::move(next);
  }

  double log_t_theta_;
  std::vector<std::int64_t> counts_;
  std::vector<double> sums_;
  std::vector<int> active_;
  std::size_t cursor_ = 0;
};

class ExploreThenCommit final : public BanditAlgorithm {
 public:
  ExploreThenCommit(int num_arms, std::int64_t k_explore)
      : k_explore_(k_explore),
        counts_(static_cast<std::size_t>(num_arms), 0),
        sums_(static_cast<std::size_t>(num_arms), 0.0) {
    if (num_arms < 1) throw std::invalid_argument("explore_then_commit: need arms");
    if (k_explore < 1) throw std::invalid_argument("explore_then_commit: k_explore must be >= 1");
  }

  int next_arm() override {
    for (std::size_t i = 0; i < counts_.size(); ++i) {
      if (counts_[i] < k_explore_) return static_cast<int>(i);
    }
    if (committed_ < 0) committed_ = empirical_best(counts_, sums_);
    return committed_;
  }

  void observe(int arm, double reward, const std::optional<std::string>&) override {
    counts_.at(static_cast<std::size_t>(arm)) += 1;
    sums_.at(static_cast<std::size_t>(arm)) += reward;
  }

  std::optional<std::string> predict() const override {
    return arm_token(empirical_best(counts_, sums_));
  }

 private:
  std::int64_t k_explore_;
  std::vector<std::int64_t> counts_;
  std::vector<double> sums_;
  int committed_ = -1;
};

class Greedy final : public BanditAlgorithm {
 public:
  explicit Greedy(std::vector<double> prior_means)
      : prior_means_(std::move(prior_means)),
        counts_(prior_means_.size(), 0),
        sums_(prior_means_.size(), 0.0) {
    if (prior_means_.empty()) throw std::invalid_argument("greedy: need prior means");
  }

  int next_arm() override {
    int best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < counts_.size(); ++i) {
      const double score =
          counts_[i] > 0 ? sums_[i] / static_cast<double>(counts_[i]) : prior_means_[i];
      if (score > best_score) {
        best_score = score;
        best = static_cast<int>(i);
      }
    }
    return best;
  }

  void observe(int arm, double reward, const std::optional<std::string>&) override {
    counts_.at(static_cast<std::size_t>(arm)) += 1;
    sums_.at(static_cast<std::size_t>(arm)) += reward;
  }

  std::optional<std::string> predict() const override {
    return arm_token(empirical_best(counts_, sums_));
  }

 private:
  std::vector<double> prior_means_;
  std::vector<std::int64_t> counts_;
  std::vector<double> sums_;
};

class Constant final : public BanditAlgorithm {
 public:
  Constant(int num_arms, int arm) : arm_(arm) {
    if (arm < 0 || arm >= num_arms) throw std::invalid_argument("constant: arm out of range");
  }
  int next_arm() override { return arm_; }
  void observe(int, double, const std::optional<std::string>&) override {}
  std::optional<std::string> predict() const override { return arm_token(arm_); }

 private:
  int arm_;
};

class EpsilonGreedyPolicies final : public ContextualBanditAlgorithm {
 public:
  EpsilonGreedyPolicies(PolicyClass policies, double epsilon, int num_arms, RngStream rng)
      : policies_(std::move(policies)),
        epsilon_(epsilon),
        num_arms_(num_arms),
        rng_(rng),
        counts_(policies_.size(), 0),
        sums_(policies_.size(), 0.0) {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
      throw std::invalid_argument("epsilon_greedy_policies: epsilon must lie in [0, 1]");
    }
    if (policies_.empty()) throw std::invalid_argument("epsilon_greedy_policies: empty class");
    const std::size_t contexts = policies_[0].size();
    for (const Policy& p : policies_) {
      if (p.size() != contexts || contexts == 0) {
        throw std::invalid_argument("epsilon_greedy_policies: policy not total");
      }
      for (int a : p) {
        if (a < 0 || a >= num_arms) {
          throw std::invalid_argument("epsilon_greedy_policies: policy arm out of range");
        }
      }
    }
  }

  int next_arm(int context) override {
    if (epsilon_ > 0.0 && rng_.uniform() < epsilon_) {
      return static_cast<int>(rng_.below(static_cast<std::uint64_t>(num_arms_)));
    }
    return policies_[static_cast<std::size_t>(best_policy())]
                    [static_cast<std::size_t>(context)];
  }

  void observe(int context, int arm, double reward, const std::optional<std::string>&) override {
    for (std::size_t p = 0; p < policies_.size(); ++p) {
      if (policies_[p][static_cast<std::size_t>(context)] == arm) {
        counts_[p] += 1;
        sums_[p] += reward;
      }
    }
  }

  std::optional<std::string> predict() const override {
    const int best = empirical_best(counts_, sums_);
    if (best < 0) return std::nullopt;
    return "policy:" + std::to_string(best + 1);
  }

 private:
  int best_policy() const {
    const int best = empirical_best(counts_, sums_);
    return best < 0 ? 0 : best;
  }

  PolicyClass policies_;
  double epsilon_;
  int num_arms_;
  RngStream rng_;
  std::vector<std::int64_t> counts_;
  std::vector<double> sums_;
};

}  // namespace

std::unique_ptr<BanditAlgorithm> make_ucb1(int num_arms) {
  return std::make_unique<Ucb1>(num_arms);
}

std::unique_ptr<BanditAlgorithm> make_active_arms_elimination(int num_arms, std::int64_t T,
                                                              double theta,
                                                              const Dataset& initial) {
  return std::make_unique<ActiveArmsElimination>(num_arms, T, theta, initial);
}

std::unique_ptr<BanditAlgorithm> make_explore_then_commit(int num_arms, std::int64_t k_explore) {
  return std::make_unique<ExploreThenCommit>(num_arms, k_explore);
}

std::unique_ptr<BanditAlgorithm> make_greedy(std::vector<double> prior_means) {
  return std::make_unique<Greedy>(std::move(prior_means));
}

std::unique_ptr<BanditAlgorithm> make_constant(int num_arms, int arm) {
  return std::make_unique<Constant>(num_arms, arm);
}

std::unique_ptr<ContextualBanditAlgorithm> epsilon_greedy_policies(PolicyClass policies,
                                                                   double epsilon, int num_arms,
                                                                   RngStream rng) {
  return std::make_unique<EpsilonGreedyPolicies>(std::move(policies), epsilon, num_arms, rng);
}

std::unique_ptr<BanditAlgorithm> make_bandit(const std::string& name, const BanditSetup& setup) {
  std::string base = name;
  std::string param;
  if (const std::size_t colon = name.find(':'); colon != std::string::npos) {
    base = name.substr(0, colon);
    param = name.substr(colon + 1);
  }
  auto parse_param = [&](std::int64_t fallback) {
    if (param.empty()) return fallback;
    try {
      return static_cast<std::int64_t>(std::stoll(param));
    } catch (const std::exception&) {
      throw std::invalid_argument("make_bandit: bad parameter in '" + name + "'");
    }
  };
  if (base == "ucb1") return make_ucb1(setup.num_arms);
  if (base == "aae") {
    return make_active_arms_elimination(setup.num_arms, std::max<std::int64_t>(setup.horizon, 1),
                                        setup.theta);
  }
  if (base == "greedy") {
    if (static_cast<int>(setup.prior_means.size()) != setup.num_arms) {
      throw std::invalid_argument("make_bandit: greedy needs one prior mean per arm");
    }
    return make_greedy(setup.prior_means);
  }
  if (base == "etc") return make_explore_then_commit(setup.num_arms, parse_param(setup.k_explore));
  if (base == "constant") {
    const std::int64_t arm1 = parse_param(setup.constant_arm + 1);
    return make_constant(setup.num_arms, static_cast<int>(arm1 - 1));
  }
  throw std::invalid_argument("make_bandit: unknown algorithm '" + name + "'");
}

std::vector<std::string> bandit_names() { return {"ucb1", "aae", "greedy", "etc", "constant"}; }

StandaloneRun run_standalone_bandit(Environment& env, const WrappedFactory& make_algo,
                                    std::int64_t T, std::uint64_t root_seed,
                                    std::uint64_t replicate) {
  if (T < 0) throw std::invalid_argument("run_standalone_bandit: T must be >= 0");
  ProtocolChecked algo(make_algo(RngStream::derive(root_seed, replicate, "algo", 0)));
  StandaloneRun run;
  run.arms.reserve(static_cast<std::size_t>(T));
  run.rewards.reserve(static_cast<std::size_t>(T));
  run.predictions.reserve(static_cast<std::size_t>(T));
  run.transcript.root_seed = root_seed;
  run.transcript.replicate = replicate;
  run.transcript.means = env.instance.means;
  const std::uint16_t play_role = run.transcript.role_id("play");
  for (std::int64_t r = 1; r <= T; ++r) {
    const int arm = algo.next_arm();
    if (arm < 0 || arm >= env.num_arms()) {
      throw std::logic_error("run_standalone_bandit: algorithm returned an invalid arm");
    }
    RngStream reward_rng =
        RngStream::derive(root_seed, replicate, "wrapped-rw", static_cast<std::uint64_t>(r));
    const double reward = env.draw(arm, reward_rng);
    algo.observe(arm, reward);
    run.arms.push_back(arm);
    run.rewards.push_back(reward);
    run.predictions.push_back(algo.predict());
    run.transcript.rows.push_back(
        TranscriptRow{r, -1, arm, reward, play_role, {}, run.predictions.back()});
  }
  return run;
}

}  // namespace bicex
