#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace bodyfit {

// Squared L2 distance between float vectors, accumulated in double over 16
// interleaved lanes with a fixed reduction order. The scalar and AVX2
// variants return bit-identical results.
double l2sq_scalar(const float* a, const float* b, std::size_t n);
double l2sq_avx2(const float* a, const float* b, std::size_t n);

// Sum of squared differences of byte codes.
std::int64_t ssd_u8_scalar(const std::uint8_t* a, const std::uint8_t* b, std::size_t n);
std::int64_t ssd_u8_avx2(const std::uint8_t* a, const std::uint8_t* b, std::size_t n);

// ssd_u8 of `q` against `rows` codes laid out every `stride` bytes.
void ssd_u8_rows_scalar(const std::uint8_t* q, const std::uint8_t* codes, std::size_t n, std::size_t stride,
                        std::size_t rows, std::int64_t* out);
void ssd_u8_rows_avx2(const std::uint8_t* q, const std::uint8_t* codes, std::size_t n, std::size_t stride,
                      std::size_t rows, std::int64_t* out);

enum class KernelIsa { Scalar, Avx2 };

std::string_view to_string(KernelIsa isa);
bool cpu_has_avx2();

// The variant used by l2sq()/ssd_u8(): AVX2 when the CPU supports it,
// unless BODYFIT_KERNEL=scalar is set or set_kernel_isa() overrides it.
KernelIsa active_kernel_isa();
void set_kernel_isa(KernelIsa isa);  // InvalidArgument if unsupported

double l2sq(const float* a, const float* b, std::size_t n);
std::int64_t ssd_u8(const std::uint8_t* a, const std::uint8_t* b, std::size_t n);
void ssd_u8_rows(const std::uint8_t* q, const std::uint8_t* codes, std::size_t n, std::size_t stride,
                 std::size_t rows, std::int64_t* out);

}  // namespace bodyfit
