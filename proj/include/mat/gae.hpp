#pragma once

#include <span>
#include <vector>

namespace mat::rl {

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// Generalized advantage estimation over one episode with terminal bootstrap
// zero: A_t = sum_{l>=0} (gamma*lambda)^l delta_{t+l}, with
// delta_t = r_t + gamma * V_{t+1} - V_t and V_T = 0. Returns are A_t + V_t.
GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      double gamma, double lambda);

}  // namespace mat::rl
