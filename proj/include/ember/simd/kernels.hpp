#pragma once

// Data-parallel inner loops shared by the feature extractors and the
// near-duplicate scan. Each kernel has a portable scalar reference and,
// on x86-64, an AVX2 variant. The variant is chosen once at startup from
// CPUID and can be pinned with EMBER_SIMD=scalar|avx2.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace ember::simd {

enum class Isa { scalar, avx2 };

struct KernelTable {
  Isa isa;

  // out[k] = number of bytes whose high nibble equals k. Overwrites out.
  void (*nibble_histogram)(const std::uint8_t* data, std::size_t n, std::uint32_t out[16]);

  // Bit i of bits[i / 64] is set iff data[i] is in [0x20, 0x7E].
  // bits must hold (n + 63) / 64 words; trailing bits of the last word are zero.
  void (*printable_bitmap)(const std::uint8_t* data, std::size_t n, std::uint64_t* bits);

  // Sum over the 128 two-bit fields of two 32-byte TLSH bodies of
  // |a - b|, with a difference of 3 scored as 6.
  std::uint32_t (*tlsh_body_distance)(const std::uint8_t* a, const std::uint8_t* b);
};

std::string_view isa_name(Isa isa);
bool isa_supported(Isa isa);

// Active table. Resolved on first use.
const KernelTable& kernels();

// Specific variant; throws std::runtime_error if the CPU lacks it.
const KernelTable& kernels_for(Isa isa);

// Test hook: switch the active table. Throws if unsupported.
void force_isa(Isa isa);
// Restores the startup selection.
void reset_isa();

namespace detail {
extern const KernelTable scalar_table;
#if defined(EMBER_HAVE_AVX2)
extern const KernelTable avx2_table;
#endif
}  // namespace detail

}  // namespace ember::simd
