// Compiled with -mavx2. Nothing in here may run unless CPUID reports AVX2;
// the dispatcher in dispatch.cpp enforces that.

#include "ember/simd/kernels.hpp"

#include <immintrin.h>

#include <cstring>

namespace ember::simd {
namespace {

inline std::uint32_t horizontal_sum_u64x4(__m256i v) {
  const __m128i lo = _mm256_castsi256_si128(v);
  const __m128i hi = _mm256_extracti128_si256(v, 1);
  const __m128i s = _mm_add_epi64(lo, hi);
  return static_cast<std::uint32_t>(_mm_cvtsi128_si64(s) + _mm_extract_epi64(s, 1));
}

void nibble_histogram_avx2(const std::uint8_t* data, std::size_t n, std::uint32_t out[16]) {
  std::memset(out, 0, 16 * sizeof(std::uint32_t));
  const __m256i low_nibble = _mm256_set1_epi8(0x0F);
  const __m256i zero = _mm256_setzero_si256();

  std::size_t i = 0;
  while (n - i >= 32) {
    // Byte lanes saturate at 255 increments; flush before that.
    std::size_t blocks = (n - i) / 32;
    if (blocks > 255) blocks = 255;
    __m256i acc[16];
    for (auto& a : acc) a = zero;
    for (std::size_t b = 0; b < blocks; ++b, i += 32) {
      const __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(data + i));
      const __m256i hi = _mm256_and_si256(_mm256_srli_epi16(v, 4), low_nibble);
      for (int k = 0; k < 16; ++k) {
        acc[k] = _mm256_sub_epi8(acc[k], _mm256_cmpeq_epi8(hi, _mm256_set1_epi8(static_cast<char>(k))));
      }
    }
    for (int k = 0; k < 16; ++k) out[k] += horizontal_sum_u64x4(_mm256_sad_epu8(acc[k], zero));
  }
  for (; i < n; ++i) ++out[data[i] >> 4];
}

void printable_bitmap_avx2(const std::uint8_t* data, std::size_t n, std::uint64_t* bits) {
  const std::size_t words = (n + 63) / 64;
  std::memset(bits, 0, words * sizeof(std::uint64_t));
  // Signed compare: 0x20..0x7E are exactly the bytes with 0x1F < c < 0x7F as int8.
  const __m256i lower = _mm256_set1_epi8(0x1F);
  const __m256i upper = _mm256_set1_epi8(0x7F);

  std::size_t i = 0;
  for (; n - i >= 64; i += 64) {
    const __m256i a = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(data + i));
    const __m256i b = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(data + i + 32));
    const __m256i ma = _mm256_and_si256(_mm256_cmpgt_epi8(a, lower), _mm256_cmpgt_epi8(upper, a));
    const __m256i mb = _mm256_and_si256(_mm256_cmpgt_epi8(b, lower), _mm256_cmpgt_epi8(upper, b));
    const auto lo = static_cast<std::uint32_t>(_mm256_movemask_epi8(ma));
    const auto hi = static_cast<std::uint32_t>(_mm256_movemask_epi8(mb));
    bits[i / 64] = (static_cast<std::uint64_t>(hi) << 32) | lo;
  }
  for (; i < n; ++i) {
    const std::uint8_t c = data[i];
    if (c >= 0x20 && c <= 0x7E) bits[i / 64] |= std::uint64_t{1} << (i % 64);
  }
}

std::uint32_t tlsh_body_distance_avx2(const std::uint8_t* a, const std::uint8_t* b) {
  const __m256i x = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a));
  const __m256i y = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b));
  const __m256i three = _mm256_set1_epi8(3);
  __m256i sum = _mm256_setzero_si256();
  // 16-bit shifts leak bits across the byte boundary, but only above bit 1,
  // which the mask drops.
  for (int shift = 0; shift < 8; shift += 2) {
    const __m128i count = _mm_cvtsi32_si128(shift);
    const __m256i xa = _mm256_and_si256(_mm256_srl_epi16(x, count), three);
    const __m256i ya = _mm256_and_si256(_mm256_srl_epi16(y, count), three);
    __m256i d = _mm256_abs_epi8(_mm256_sub_epi8(xa, ya));
    d = _mm256_add_epi8(d, _mm256_and_si256(_mm256_cmpeq_epi8(d, three), three));
    sum = _mm256_add_epi8(sum, d);
  }
  return horizontal_sum_u64x4(_mm256_sad_epu8(sum, _mm256_setzero_si256()));
}

}  // namespace

namespace detail {
const KernelTable avx2_table{
    Isa::avx2,
    &nibble_histogram_avx2,
    &printable_bitmap_avx2,
    &tlsh_body_distance_avx2,
};
}  // namespace detail

}  // namespace ember::simd
