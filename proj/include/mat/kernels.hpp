#pragma once

#include <cstddef>
#include <string>

namespace mat::kern {

// Double-precision vector kernels behind the network math. Scalar reference
// implementations always exist; an AVX2/FMA variant is selected at runtime
// when the CPU supports it. Both variants satisfy the same contracts and are
// equivalence-tested against each other.
struct Ops {
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double* y, double alpha, const double* x, std::size_t n);
  // y[r] = dot(W row r, x) + b[r], W row-major (rows x cols)
  void (*affine)(double* y, const double* w, const double* b, const double* x,
                 std::size_t rows, std::size_t cols);
  // sum_i x[i]^2
  double (*sumsq)(const double* x, std::size_t n);
  // y[i] *= alpha
  void (*scale)(double* y, double alpha, std::size_t n);
};

const Ops& scalar_ops();
const Ops& avx2_ops();       // valid only if avx2_supported()
bool avx2_supported();

// Active implementation: AVX2 when supported, else scalar. The environment
// variable MAT_KERNELS=scalar|avx2 overrides the automatic choice (used by
// the equivalence tests).
const Ops& ops();
std::string active_kernel_name();

}  // namespace mat::kern
