#include <doctest.h>

#include <cmath>
#include <vector>

#include "mat/kernels.hpp"
#include "mat/rng.hpp"

using namespace mat;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n, double scale = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-scale, scale);
  return v;
}

bool close(double a, double b, double tol) {
  return std::fabs(a - b) <= tol * std::max({1.0, std::fabs(a), std::fabs(b)});
}

}  // namespace

TEST_CASE("scalar and simd kernels agree on awkward sizes") {
  if (!kern::avx2_supported()) return;  // nothing to compare on this host
  const auto& s = kern::scalar_ops();
  const auto& v = kern::avx2_ops();
  Rng rng(42);

  for (std::size_t n : {1u, 2u, 3u, 7u, 8u, 9u, 31u, 64u, 67u, 128u, 1000u}) {
    auto a = random_vec(rng, n), b = random_vec(rng, n);
    CHECK(close(s.dot(a.data(), b.data(), n), v.dot(a.data(), b.data(), n), 1e-13));
    CHECK(close(s.sumsq(a.data(), n), v.sumsq(a.data(), n), 1e-13));

    auto y1 = random_vec(rng, n);
    auto y2 = y1;
    s.axpy(y1.data(), 0.37, a.data(), n);
    v.axpy(y2.data(), 0.37, a.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(close(y1[i], y2[i], 1e-13));

    auto z1 = y1, z2 = y1;
    s.scale(z1.data(), -1.7, n);
    v.scale(z2.data(), -1.7, n);
    for (std::size_t i = 0; i < n; ++i) CHECK(close(z1[i], z2[i], 1e-13));
  }
}

TEST_CASE("affine matches the matrix-vector definition") {
  Rng rng(7);
  const std::size_t rows = 13, cols = 57;
  auto w = random_vec(rng, rows * cols);
  auto b = random_vec(rng, rows);
  auto x = random_vec(rng, cols);

  std::vector<double> expected(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = b[r];
    for (std::size_t c = 0; c < cols; ++c) acc += w[r * cols + c] * x[c];
    expected[r] = acc;
  }

  std::vector<double> got(rows);
  kern::scalar_ops().affine(got.data(), w.data(), b.data(), x.data(), rows, cols);
  for (std::size_t r = 0; r < rows; ++r) CHECK(got[r] == doctest::Approx(expected[r]));

  if (kern::avx2_supported()) {
    std::vector<double> got2(rows);
    kern::avx2_ops().affine(got2.data(), w.data(), b.data(), x.data(), rows, cols);
    for (std::size_t r = 0; r < rows; ++r) CHECK(close(got[r], got2[r], 1e-13));
  }
}

TEST_CASE("runtime dispatch picks a valid implementation") {
  const auto name = kern::active_kernel_name();
  CHECK((name == "scalar" || name == "avx2"));
  std::vector<double> a{1.0, 2.0, 3.0}, b{4.0, 5.0, 6.0};
  CHECK(kern::ops().dot(a.data(), b.data(), 3) == doctest::Approx(32.0));
}
