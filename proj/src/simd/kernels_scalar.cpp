#include "btx/simd.hpp"

namespace btx::simd::scalar {

namespace {

template <typename T>
double striped_dot(const T* a, const T* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  const std::size_t n4 = n & ~std::size_t{3};
  std::size_t i = 0;
  for (; i < n4; i += 4) {
    s0 += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    s1 += static_cast<double>(a[i + 1]) * static_cast<double>(b[i + 1]);
    s2 += static_cast<double>(a[i + 2]) * static_cast<double>(b[i + 2]);
    s3 += static_cast<double>(a[i + 3]) * static_cast<double>(b[i + 3]);
  }
  double s = (s0 + s2) + (s1 + s3);
  for (; i < n; ++i) s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return s;
}

}  // namespace

double dot_f32(const float* a, const float* b, std::size_t n) { return striped_dot(a, b, n); }
double dot_f64(const double* a, const double* b, std::size_t n) { return striped_dot(a, b, n); }

}  // namespace btx::simd::scalar
