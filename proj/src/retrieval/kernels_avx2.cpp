#include "bodyfit/retrieval/kernels.hpp"

#if defined(BODYFIT_HAVE_AVX2_TU)
#include <immintrin.h>

#include <algorithm>
#endif

namespace bodyfit {

#if defined(BODYFIT_HAVE_AVX2_TU)

namespace {

double reduce16(const double* acc) {
  double t[4];
  for (int l = 0; l < 4; ++l) t[l] = ((acc[l] + acc[l + 4]) + acc[l + 8]) + acc[l + 12];
  return (t[0] + t[1]) + (t[2] + t[3]);
}

inline __m256d sq_diff(const float* a, const float* b) {
  const __m256d d = _mm256_sub_pd(_mm256_cvtps_pd(_mm_loadu_ps(a)), _mm256_cvtps_pd(_mm_loadu_ps(b)));
  return _mm256_mul_pd(d, d);
}

}  // namespace

double l2sq_avx2(const float* a, const float* b, std::size_t n) {
  __m256d r0 = _mm256_setzero_pd(), r1 = r0, r2 = r0, r3 = r0;
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    r0 = _mm256_add_pd(r0, sq_diff(a + i, b + i));
    r1 = _mm256_add_pd(r1, sq_diff(a + i + 4, b + i + 4));
    r2 = _mm256_add_pd(r2, sq_diff(a + i + 8, b + i + 8));
    r3 = _mm256_add_pd(r3, sq_diff(a + i + 12, b + i + 12));
  }
  alignas(32) double acc[16];
  _mm256_store_pd(acc, r0);
  _mm256_store_pd(acc + 4, r1);
  _mm256_store_pd(acc + 8, r2);
  _mm256_store_pd(acc + 12, r3);
  for (int l = 0; i < n; ++i, ++l) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    acc[l] += d * d;
  }
  return reduce16(acc);
}

std::int64_t ssd_u8_avx2(const std::uint8_t* a, const std::uint8_t* b, std::size_t n) {
  const __m256i zero = _mm256_setzero_si256();
  __m256i acc0 = zero, acc1 = zero;
  std::int64_t total = 0;
  std::size_t i = 0;
  while (i + 32 <= n) {
    // At most 2 * 255^2 per 32-bit lane and step; 4096 steps stay in range.
    const std::size_t end = std::min(n - (n - i) % 32, i + 32 * 4096);
    for (; i < end; i += 32) {
      const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
      const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
      const __m256i d = _mm256_sub_epi8(_mm256_max_epu8(va, vb), _mm256_min_epu8(va, vb));
      const __m256i lo = _mm256_unpacklo_epi8(d, zero), hi = _mm256_unpackhi_epi8(d, zero);
      acc0 = _mm256_add_epi32(acc0, _mm256_madd_epi16(lo, lo));
      acc1 = _mm256_add_epi32(acc1, _mm256_madd_epi16(hi, hi));
    }
    alignas(32) std::int32_t lanes[8];
    _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), _mm256_add_epi32(acc0, acc1));
    for (std::int32_t v : lanes) total += v;
    acc0 = acc1 = zero;
  }
  for (; i < n; ++i) {
    const int d = static_cast<int>(a[i]) - static_cast<int>(b[i]);
    total += d * d;
  }
  return total;
}

void ssd_u8_rows_avx2(const std::uint8_t* q, const std::uint8_t* codes, std::size_t n, std::size_t stride,
                      std::size_t rows, std::int64_t* out) {
  for (std::size_t r = 0; r < rows; ++r) out[r] = ssd_u8_avx2(q, codes + r * stride, n);
}

#else

double l2sq_avx2(const float* a, const float* b, std::size_t n) { return l2sq_scalar(a, b, n); }
std::int64_t ssd_u8_avx2(const std::uint8_t* a, const std::uint8_t* b, std::size_t n) {
  return ssd_u8_scalar(a, b, n);
}
void ssd_u8_rows_avx2(const std::uint8_t* q, const std::uint8_t* codes, std::size_t n, std::size_t stride,
                      std::size_t rows, std::int64_t* out) {
  ssd_u8_rows_scalar(q, codes, n, stride, rows, out);
}

#endif

}  // namespace bodyfit
