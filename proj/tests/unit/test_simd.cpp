#include <doctest.h>

#include <array>
#include <vector>

#include "ember/simd/kernels.hpp"
#include "splitmix.hpp"

using namespace ember;

namespace {

std::vector<simd::Isa> available() {
  std::vector<simd::Isa> out;
  for (auto isa : {simd::Isa::scalar, simd::Isa::avx2})
    if (simd::isa_supported(isa)) out.push_back(isa);
  return out;
}

}  // namespace

TEST_CASE("every variant agrees with the scalar reference") {
  const auto& ref = simd::kernels_for(simd::Isa::scalar);
  ember::testing::SplitMix64 rng(11);
  const std::size_t lengths[] = {0, 1, 7, 31, 32, 33, 63, 64, 65, 255, 256, 1000, 4096, 8191, 70000, 300000};

  for (auto isa : available()) {
    const auto& k = simd::kernels_for(isa);
    CAPTURE(simd::isa_name(isa));
    for (std::size_t n : lengths) {
      for (int variant = 0; variant < 3; ++variant) {
        auto data = ember::testing::splitmix_bytes(rng.next(), n);
        if (variant == 1) for (auto& b : data) b = static_cast<std::uint8_t>(0x1E + b % 0x64);  // straddles both bounds
        if (variant == 2) for (auto& b : data) b = 0xF7;  // long single-value runs stress counter flushes

        std::uint32_t want[16], got[16];
        ref.nibble_histogram(data.data(), n, want);
        k.nibble_histogram(data.data(), n, got);
        for (int i = 0; i < 16; ++i) CHECK(got[i] == want[i]);

        std::vector<std::uint64_t> bw((n + 63) / 64, ~0ull), bg((n + 63) / 64, ~0ull);
        ref.printable_bitmap(data.data(), n, bw.data());
        k.printable_bitmap(data.data(), n, bg.data());
        CHECK(bw == bg);
      }
    }
    for (int trial = 0; trial < 2000; ++trial) {
      auto a = ember::testing::splitmix_bytes(rng.next(), 32);
      auto b = trial % 3 == 0 ? a : ember::testing::splitmix_bytes(rng.next(), 32);
      if (trial % 5 == 0) b[trial % 32] ^= 0xFF;
      CHECK(k.tlsh_body_distance(a.data(), b.data()) == ref.tlsh_body_distance(a.data(), b.data()));
    }
  }
}

TEST_CASE("scalar reference kernels match their definitions") {
  const auto& ref = simd::kernels_for(simd::Isa::scalar);
  const auto data = ember::testing::splitmix_bytes(5, 777);

  std::uint32_t nib[16];
  ref.nibble_histogram(data.data(), data.size(), nib);
  std::array<std::uint32_t, 16> naive{};
  for (auto b : data) ++naive[b >> 4];
  for (int i = 0; i < 16; ++i) CHECK(nib[i] == naive[i]);

  std::vector<std::uint64_t> bits((data.size() + 63) / 64);
  ref.printable_bitmap(data.data(), data.size(), bits.data());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const bool printable = data[i] >= 0x20 && data[i] <= 0x7E;
    CHECK(((bits[i / 64] >> (i % 64)) & 1) == (printable ? 1u : 0u));
  }
  CHECK((bits.back() >> (data.size() % 64)) == 0);

  std::uint8_t a[32] = {}, b[32] = {};
  b[0] = 0b11'10'01'00;  // lane diffs 0, 1, 2, 3 -> 0 + 1 + 2 + 6
  CHECK(ref.tlsh_body_distance(a, b) == 9);
}

TEST_CASE("forcing and resetting the active variant") {
  simd::force_isa(simd::Isa::scalar);
  CHECK(simd::kernels().isa == simd::Isa::scalar);
  simd::reset_isa();
  if (!simd::isa_supported(simd::Isa::avx2)) CHECK_THROWS(simd::force_isa(simd::Isa::avx2));
}
