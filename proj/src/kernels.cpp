#include "qrep/kernels.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace qrep::kernels {

bool avx2_available() noexcept {
#if defined(QREP_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

#if !defined(QREP_HAVE_AVX2)
const Ops& avx2_ops() noexcept { return scalar_ops(); }
#endif

namespace {

const Ops& pick_backend() {
  const char* req = std::getenv("QREP_KERNELS");
  if (req != nullptr && std::strcmp(req, "scalar") == 0) return scalar_ops();
  if (req != nullptr && std::strcmp(req, "avx2") == 0) {
    if (avx2_available()) return avx2_ops();
    std::fprintf(stderr, "qrep: QREP_KERNELS=avx2 requested but unavailable; using scalar\n");
    return scalar_ops();
  }
  if (req != nullptr && req[0] != '\0' && std::strcmp(req, "auto") != 0) {
    std::fprintf(stderr, "qrep: unknown QREP_KERNELS=%s; using auto\n", req);
  }
  return avx2_available() ? avx2_ops() : scalar_ops();
}

}  // namespace

const Ops& active() noexcept {
  static const Ops& ops = pick_backend();
  return ops;
}

}  // namespace qrep::kernels
