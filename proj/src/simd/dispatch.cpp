#include <cstdlib>
#include <cstring>

#include "bdmm/simd/kernels.hpp"

namespace bdmm::simd {

#if defined(__x86_64__) || defined(_M_X64)
bool avx2_supported() { return __builtin_cpu_supports("avx2") != 0; }
#endif

namespace {

const Ops& select() {
  if (const char* env = std::getenv("BDMM_SIMD")) {
    if (std::strcmp(env, "scalar") == 0) return scalar_ops();
#if defined(__x86_64__) || defined(_M_X64)
    if (std::strcmp(env, "avx2") == 0 && avx2_supported()) return avx2_ops();
#endif
  }
#if defined(__x86_64__) || defined(_M_X64)
  if (avx2_supported()) return avx2_ops();
#endif
  return scalar_ops();
}

}  // namespace

const Ops& ops() {
  static const Ops& chosen = select();
  return chosen;
}

}  // namespace bdmm::simd
