// AVX2/FMA kernel variants. Compiled with -mavx2 -mfma on x86-64; the
// dispatcher never calls into this TU unless cpuid reports support.

#include "mat/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define MAT_HAVE_AVX2_BUILD 1
#include <immintrin.h>
#else
#define MAT_HAVE_AVX2_BUILD 0
#endif

namespace mat::kern {

#if MAT_HAVE_AVX2_BUILD
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d shuf = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_avx2(double* y, double alpha, const double* x, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void affine_avx2(double* y, const double* w, const double* b, const double* x,
                 std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    y[r] = b[r] + dot_avx2(w + r * cols, x, cols);
  }
}

double sumsq_avx2(const double* x, std::size_t n) {
  return dot_avx2(x, x, n);
}

void scale_avx2(double* y, double alpha, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_mul_pd(va, _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] *= alpha;
}

}  // namespace

const Ops& avx2_ops() {
  static const Ops ops{dot_avx2, axpy_avx2, affine_avx2, sumsq_avx2, scale_avx2};
  return ops;
}

bool avx2_supported() {
#if defined(__GNUC__) || defined(__clang__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

#else  // !MAT_HAVE_AVX2_BUILD

const Ops& avx2_ops() { return scalar_ops(); }
bool avx2_supported() { return false; }

#endif

}  // namespace mat::kern
