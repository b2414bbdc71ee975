#include "mat/gae.hpp"

#include <stdexcept>

namespace mat::rl {

GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      double gamma, double lambda) {
  if (rewards.size() != values.size())
    throw std::invalid_argument("compute_gae: rewards/values length mismatch");
  const std::size_t n = rewards.size();
  GaeResult out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);

  double running = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const double next_v = i + 1 < n ? values[i + 1] : 0.0;
    const double delta = rewards[i] + gamma * next_v - values[i];
    running = delta + gamma * lambda * running;
    out.advantages[i] = running;
    out.returns[i] = running + values[i];
  }
  return out;
}

}  // namespace mat::rl
