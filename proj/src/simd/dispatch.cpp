#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "btx/simd.hpp"

namespace btx::simd {

namespace {

constexpr Kernels kScalar{Isa::Scalar, &scalar::dot_f32, &scalar::dot_f64};
#if defined(BTX_HAVE_AVX2)
constexpr Kernels kAvx2{Isa::Avx2, &avx2::dot_f32, &avx2::dot_f64};
#endif
#if defined(BTX_HAVE_NEON)
constexpr Kernels kNeon{Isa::Neon, &neon::dot_f32, &neon::dot_f64};
#endif

const Kernels* pick_default() {
  if (const char* env = std::getenv("BTX_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return &kernels_for(Isa::Scalar);
    if (want == "avx2" && supported(Isa::Avx2)) return &kernels_for(Isa::Avx2);
    if (want == "neon" && supported(Isa::Neon)) return &kernels_for(Isa::Neon);
  }
  if (supported(Isa::Avx2)) return &kernels_for(Isa::Avx2);
  if (supported(Isa::Neon)) return &kernels_for(Isa::Neon);
  return &kScalar;
}

std::atomic<const Kernels*> g_active{nullptr};

}  // namespace

bool supported(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(BTX_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(BTX_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const Kernels& kernels_for(Isa isa) {
  if (!supported(isa)) throw std::invalid_argument("simd: " + std::string(name(isa)) + " not supported here");
  switch (isa) {
#if defined(BTX_HAVE_AVX2)
    case Isa::Avx2:
      return kAvx2;
#endif
#if defined(BTX_HAVE_NEON)
    case Isa::Neon:
      return kNeon;
#endif
    default:
      return kScalar;
  }
}

const Kernels& active() {
  const Kernels* k = g_active.load(std::memory_order_acquire);
  if (k == nullptr) {
    k = pick_default();
    g_active.store(k, std::memory_order_release);
  }
  return *k;
}

void set_active(Isa isa) { g_active.store(&kernels_for(isa), std::memory_order_release); }

std::string_view name(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
    case Isa::Neon:
      return "neon";
  }
  return "unknown";
}

}  // namespace btx::simd
