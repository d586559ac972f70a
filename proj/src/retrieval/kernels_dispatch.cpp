#include <atomic>
#include <cstdlib>
#include <cstring>

#include "bodyfit/error.hpp"
#include "bodyfit/retrieval/kernels.hpp"

namespace bodyfit {

std::string_view to_string(KernelIsa isa) { return isa == KernelIsa::Avx2 ? "avx2" : "scalar"; }

bool cpu_has_avx2() {
#if defined(BODYFIT_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

namespace {

KernelIsa detect() {
  const char* env = std::getenv("BODYFIT_KERNEL");
  if (env && std::strcmp(env, "scalar") == 0) return KernelIsa::Scalar;
  return cpu_has_avx2() ? KernelIsa::Avx2 : KernelIsa::Scalar;
}

std::atomic<KernelIsa>& current() {
  static std::atomic<KernelIsa> isa{detect()};
  return isa;
}

}  // namespace

KernelIsa active_kernel_isa() { return current().load(std::memory_order_relaxed); }

void set_kernel_isa(KernelIsa isa) {
  if (isa == KernelIsa::Avx2 && !cpu_has_avx2()) fail(ErrorCode::InvalidArgument, "CPU does not support AVX2");
  current().store(isa, std::memory_order_relaxed);
}

double l2sq(const float* a, const float* b, std::size_t n) {
  return active_kernel_isa() == KernelIsa::Avx2 ? l2sq_avx2(a, b, n) : l2sq_scalar(a, b, n);
}

std::int64_t ssd_u8(const std::uint8_t* a, const std::uint8_t* b, std::size_t n) {
  return active_kernel_isa() == KernelIsa::Avx2 ? ssd_u8_avx2(a, b, n) : ssd_u8_scalar(a, b, n);
}

void ssd_u8_rows(const std::uint8_t* q, const std::uint8_t* codes, std::size_t n, std::size_t stride,
                 std::size_t rows, std::int64_t* out) {
  if (active_kernel_isa() == KernelIsa::Avx2)
    ssd_u8_rows_avx2(q, codes, n, stride, rows, out);
  else
    ssd_u8_rows_scalar(q, codes, n, stride, rows, out);
}

}  // namespace bodyfit
