#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mat::optim {

// Clips the global L2 norm of `grad` to `max_norm` (exact scaling when the
// norm exceeds the bound). Returns the pre-clip norm.
double clip_global_norm(std::span<double> grad, double max_norm);

struct Adam {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t t = 0;
  std::vector<double> m, v;

  void reset(std::size_t n) {
    t = 0;
    m.assign(n, 0.0);
    v.assign(n, 0.0);
  }

  void step(std::span<double> params, std::span<const double> grad);
};

}  // namespace mat::optim
