#pragma once

// Dot-product kernels with a fixed accumulation order.
//
// Every variant accumulates in double over four interleaved stripes:
// stripe j sums the products at indices i with i % 4 == j over the largest
// multiple-of-four prefix, the stripes are folded as (s0 + s2) + (s1 + s3),
// and the tail is added sequentially. Products of two floats are exact in
// double, and no variant contracts into FMA, so scalar and vector kernels
// return bit-identical results.

#include <cstddef>
#include <string_view>

namespace btx::simd {

enum class Isa { Scalar, Avx2, Neon };

struct Kernels {
  Isa isa;
  double (*dot_f32)(const float* a, const float* b, std::size_t n);
  double (*dot_f64)(const double* a, const double* b, std::size_t n);
};

namespace scalar {
double dot_f32(const float* a, const float* b, std::size_t n);
double dot_f64(const double* a, const double* b, std::size_t n);
}  // namespace scalar

#if defined(BTX_HAVE_AVX2)
namespace avx2 {
double dot_f32(const float* a, const float* b, std::size_t n);
double dot_f64(const double* a, const double* b, std::size_t n);
}  // namespace avx2
#endif

#if defined(BTX_HAVE_NEON)
namespace neon {
double dot_f32(const float* a, const float* b, std::size_t n);
double dot_f64(const double* a, const double* b, std::size_t n);
}  // namespace neon
#endif

/// True when this binary carries the variant and the CPU can run it.
bool supported(Isa isa);

/// Kernel table for a specific ISA. Throws std::invalid_argument if unsupported.
const Kernels& kernels_for(Isa isa);

/// The table in use. Picks the widest supported ISA on first call unless the
/// BTX_SIMD environment variable (scalar|avx2|neon) or set_active() says otherwise.
const Kernels& active();

void set_active(Isa isa);

std::string_view name(Isa isa);

inline double dot(const float* a, const float* b, std::size_t n) { return active().dot_f32(a, b, n); }
inline double dot(const double* a, const double* b, std::size_t n) { return active().dot_f64(a, b, n); }

}  // namespace btx::simd
