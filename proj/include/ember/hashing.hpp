#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ember {

// MurmurHash3 x86_32.
std::uint32_t murmur3_32(std::string_view key, std::uint32_t seed);

struct HashedItem {
  std::string key;
  double weight = 1.0;
};

inline constexpr std::uint32_t kEmbedSeed = 0x454D4233;        // "EMB3"
inline constexpr std::uint32_t kEmbedSignSeed = 0x7369676E;    // "sign"

// Hashing trick: out[murmur(key) % out.size()] += sign(key) * weight, where the
// sign comes from the low bit of a second, independently seeded hash.
// Adds into out; caller zeroes it. out must be non-empty.
void hash_embed(std::span<const HashedItem> items, std::span<float> out,
                std::uint32_t seed = kEmbedSeed);

// Convenience: returns a fresh vector of `buckets` entries.
std::vector<float> hash_embed(std::span<const HashedItem> items, std::size_t buckets,
                              std::uint32_t seed = kEmbedSeed);

}  // namespace ember
