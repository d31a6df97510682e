#pragma once

#include <vector>

#include "bicex/model.hpp"
#include "bicex/rng.hpp"

namespace bicex {

/// A realized instance plus its reward distributions. Simulation runners and
/// the detail-free algorithms interact with arms only through this surface.
struct Environment {
  MabInstance instance;
  std::vector<RewardFamily> rewards;

  int num_arms() const { return instance.num_arms(); }

  double draw(int arm, RngStream& rng) const {
    return draw_reward(rewards.at(static_cast<std::size_t>(arm)),
                       instance.means.at(static_cast<std::size_t>(arm)), rng);
  }
};

}  // namespace bicex
