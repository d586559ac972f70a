#include "bodyfit/retrieval/kernels.hpp"

namespace bodyfit {

namespace {

double reduce16(const double* acc) {
  double t[4];
  for (int l = 0; l < 4; ++l) t[l] = ((acc[l] + acc[l + 4]) + acc[l + 8]) + acc[l + 12];
  return (t[0] + t[1]) + (t[2] + t[3]);
}

}  // namespace

double l2sq_scalar(const float* a, const float* b, std::size_t n) {
  double acc[16] = {};
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16)
    for (int l = 0; l < 16; ++l) {
      const double d = static_cast<double>(a[i + l]) - static_cast<double>(b[i + l]);
      acc[l] += d * d;
    }
  for (int l = 0; i < n; ++i, ++l) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    acc[l] += d * d;
  }
  return reduce16(acc);
}

std::int64_t ssd_u8_scalar(const std::uint8_t* a, const std::uint8_t* b, std::size_t n) {
  std::int64_t s = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const int d = static_cast<int>(a[i]) - static_cast<int>(b[i]);
    s += d * d;
  }
  return s;
}

void ssd_u8_rows_scalar(const std::uint8_t* q, const std::uint8_t* codes, std::size_t n, std::size_t stride,
                        std::size_t rows, std::int64_t* out) {
  for (std::size_t r = 0; r < rows; ++r) out[r] = ssd_u8_scalar(q, codes + r * stride, n);
}

}  // namespace bodyfit
