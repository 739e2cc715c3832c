#include <arm_neon.h>

#include "btx/simd.hpp"

namespace btx::simd::neon {

// lo holds stripes {0,1}, hi holds stripes {2,3}; lo + hi = {s0+s2, s1+s3}.
namespace {

inline double fold(float64x2_t lo, float64x2_t hi) {
  const float64x2_t pair = vaddq_f64(lo, hi);
  return vgetq_lane_f64(pair, 0) + vgetq_lane_f64(pair, 1);
}

}  // namespace

double dot_f32(const float* a, const float* b, std::size_t n) {
  float64x2_t lo = vdupq_n_f64(0.0);
  float64x2_t hi = vdupq_n_f64(0.0);
  const std::size_t n4 = n & ~std::size_t{3};
  std::size_t i = 0;
  for (; i < n4; i += 4) {
    const float32x4_t x = vld1q_f32(a + i);
    const float32x4_t y = vld1q_f32(b + i);
    lo = vaddq_f64(lo, vmulq_f64(vcvt_f64_f32(vget_low_f32(x)), vcvt_f64_f32(vget_low_f32(y))));
    hi = vaddq_f64(hi, vmulq_f64(vcvt_high_f64_f32(x), vcvt_high_f64_f32(y)));
  }
  double s = fold(lo, hi);
  for (; i < n; ++i) s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return s;
}

double dot_f64(const double* a, const double* b, std::size_t n) {
  float64x2_t lo = vdupq_n_f64(0.0);
  float64x2_t hi = vdupq_n_f64(0.0);
  const std::size_t n4 = n & ~std::size_t{3};
  std::size_t i = 0;
  for (; i < n4; i += 4) {
    lo = vaddq_f64(lo, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    hi = vaddq_f64(hi, vmulq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2)));
  }
  double s = fold(lo, hi);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace btx::simd::neon
