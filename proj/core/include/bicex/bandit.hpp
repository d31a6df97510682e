#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bicex/rng.hpp"

namespace bicex {

/// A bandit algorithm to wrap or to run standalone. Calls must alternate
/// next_arm / observe strictly; predict may be called at any time and must
/// not mutate state.
class BanditAlgorithm {
 public:
  virtual ~BanditAlgorithm() = default;
  virtual int next_arm() = 0;
  virtual void observe(int arm, double reward,
                       const std::optional<std::string>& feedback = std::nullopt) = 0;
  virtual std::optional<std::string> predict() const = 0;
};

/// A context -> arm table; index is the context id.
using Policy = std::vector<int>;
using PolicyClass = std::vector<Policy>;

/// Builds a fresh wrapped-algorithm instance; the stream is the algorithm's
/// only source of randomness, so coupled runs share it by key.
using WrappedFactory = std::function<std::unique_ptr<BanditAlgorithm>(RngStream)>;

class ContextualBanditAlgorithm {
 public:
  virtual ~ContextualBanditAlgorithm() = default;
  virtual int next_arm(int context) = 0;
  virtual void observe(int context, int arm, double reward,
                       const std::optional<std::string>& feedback = std::nullopt) = 0;
  virtual std::optional<std::string> predict() const = 0;
};

using ContextualFactory =
    std::function<std::unique_ptr<ContextualBanditAlgorithm>(RngStream)>;

/// Enforces the next_arm / observe alternation contract, throwing
/// std::logic_error on violations. The reductions drive wrapped algorithms
/// through this wrapper.
class ProtocolChecked final : public BanditAlgorithm {
 public:
  explicit ProtocolChecked(std::unique_ptr<BanditAlgorithm> inner)
      : inner_(std::move(inner)) {
    if (inner_ == nullptr) throw std::invalid_argument("ProtocolChecked: null algorithm");
  }

  int next_arm() override {
    if (awaiting_observe_) {
      throw std::logic_error("bandit protocol violation: next_arm called twice");
    }
    last_arm_ = inner_->next_arm();
    awaiting_observe_ = true;
    return last_arm_;
  }

  void observe(int arm, double reward,
               const std::optional<std::string>& feedback = std::nullopt) override {
    if (!awaiting_observe_) {
      throw std::logic_error("bandit protocol violation: observe before next_arm");
    }
    if (arm != last_arm_) {
      throw std::logic_error("bandit protocol violation: observed arm differs from played arm");
    }
    inner_->observe(arm, reward, feedback);
    awaiting_observe_ = false;
  }

  std::optional<std::string> predict() const override { return inner_->predict(); }

 private:
  std::unique_ptr<BanditAlgorithm> inner_;
  bool awaiting_observe_ = false;
  int last_arm_ = -1;
};

class ContextualProtocolChecked final : public ContextualBanditAlgorithm {
 public:
  explicit ContextualProtocolChecked(std::unique_ptr<ContextualBanditAlgorithm> inner)
      : inner_(std::move(inner)) {
    if (inner_ == nullptr) {
      throw std::invalid_argument("ContextualProtocolChecked: null algorithm");
    }
  }

  int next_arm(int context) override {
    if (awaiting_observe_) {
      throw std::logic_error("bandit protocol violation: next_arm called twice");
    }
    last_arm_ = inner_->next_arm(context);
    last_context_ = context;
    awaiting_observe_ = true;
    return last_arm_;
  }

  void observe(int context, int arm, double reward,
               const std::optional<std::string>& feedback = std::nullopt) override {
    if (!awaiting_observe_) {
      throw std::logic_error("bandit protocol violation: observe before next_arm");
    }
    if (arm != last_arm_ || context != last_context_) {
      throw std::logic_error(
          "bandit protocol violation: observed round differs from played round");
    }
    inner_->observe(context, arm, reward, feedback);
    awaiting_observe_ = false;
  }

  std::optional<std::string> predict() const override { return inner_->predict(); }

 private:
  std::unique_ptr<ContextualBanditAlgorithm> inner_;
  bool awaiting_observe_ = false;
  int last_arm_ = -1;
  int last_context_ = -1;
};

}  // namespace bicex
