#include "ember/simd/kernels.hpp"

#include <cstring>

namespace ember::simd {
namespace {

void nibble_histogram_scalar(const std::uint8_t* data, std::size_t n, std::uint32_t out[16]) {
  std::memset(out, 0, 16 * sizeof(std::uint32_t));
  for (std::size_t i = 0; i < n; ++i) ++out[data[i] >> 4];
}

void printable_bitmap_scalar(const std::uint8_t* data, std::size_t n, std::uint64_t* bits) {
  const std::size_t words = (n + 63) / 64;
  std::memset(bits, 0, words * sizeof(std::uint64_t));
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t c = data[i];
    if (c >= 0x20 && c <= 0x7E) bits[i / 64] |= std::uint64_t{1} << (i % 64);
  }
}

std::uint32_t tlsh_body_distance_scalar(const std::uint8_t* a, const std::uint8_t* b) {
  std::uint32_t total = 0;
  for (int i = 0; i < 32; ++i) {
    for (int shift = 0; shift < 8; shift += 2) {
      const int x = (a[i] >> shift) & 3;
      const int y = (b[i] >> shift) & 3;
      const int d = x > y ? x - y : y - x;
      total += d == 3 ? 6u : static_cast<std::uint32_t>(d);
    }
  }
  return total;
}

}  // namespace

namespace detail {
const KernelTable scalar_table{
    Isa::scalar,
    &nibble_histogram_scalar,
    &printable_bitmap_scalar,
    &tlsh_body_distance_scalar,
};
}  // namespace detail

}  // namespace ember::simd
