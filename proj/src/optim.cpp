#include "mat/optim.hpp"

#include <cmath>
#include <stdexcept>

#include "mat/kernels.hpp"

namespace mat::optim {

double clip_global_norm(std::span<double> grad, double max_norm) {
  const double norm = std::sqrt(kern::ops().sumsq(grad.data(), grad.size()));
  if (norm > max_norm && norm > 0.0) {
    kern::ops().scale(grad.data(), max_norm / norm, grad.size());
  }
  return norm;
}

void Adam::step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != m.size() || grad.size() != m.size())
    throw std::invalid_argument("adam: size mismatch");
  t += 1;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
    const double mhat = m[i] / bc1;
    const double vhat = v[i] / bc2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

}  // namespace mat::optim
