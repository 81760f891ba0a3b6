#include <atomic>
#include <string>

#include "ocs/kernels/kernels.hpp"

namespace ocs::kern {

const Kernels* avx2_kernels();  // nullptr when built for a non-x86 target

namespace {
std::atomic<bool> g_force_scalar{false};
}

bool cpu_supports_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

void force_scalar(bool on) { g_force_scalar.store(on); }

const Kernels& kernels() {
  if (g_force_scalar.load()) return scalar_kernels();
  const Kernels* simd = avx2_kernels();
  if (simd != nullptr && cpu_supports_avx2()) return *simd;
  return scalar_kernels();
}

const std::string& active_variant() {
  static const std::string scalar = "scalar";
  static const std::string avx2 = "avx2";
  if (g_force_scalar.load()) return scalar;
  return (avx2_kernels() != nullptr && cpu_supports_avx2()) ? avx2 : scalar;
}

}  // namespace ocs::kern
