#include "mat/kernels.hpp"

namespace mat::kern {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double* y, double alpha, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void affine_scalar(double* y, const double* w, const double* b, const double* x,
                   std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    y[r] = b[r] + dot_scalar(w + r * cols, x, cols);
  }
}

double sumsq_scalar(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * x[i];
  return s;
}

void scale_scalar(double* y, double alpha, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] *= alpha;
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops ops{dot_scalar, axpy_scalar, affine_scalar, sumsq_scalar, scale_scalar};
  return ops;
}

}  // namespace mat::kern
