#include "ember/hashing.hpp"

#include <algorithm>
#include <cstring>
#include <stdexcept>

namespace ember {
namespace {

inline std::uint32_t rotl32(std::uint32_t x, int r) { return (x << r) | (x >> (32 - r)); }

}  // namespace

std::uint32_t murmur3_32(std::string_view key, std::uint32_t seed) {
  const auto* data = reinterpret_cast<const std::uint8_t*>(key.data());
  const std::size_t len = key.size();
  const std::size_t nblocks = len / 4;
  constexpr std::uint32_t c1 = 0xcc9e2d51;
  constexpr std::uint32_t c2 = 0x1b873593;

  std::uint32_t h1 = seed;
  for (std::size_t i = 0; i < nblocks; ++i) {
    std::uint32_t k1 = static_cast<std::uint32_t>(data[4 * i]) |
                       (static_cast<std::uint32_t>(data[4 * i + 1]) << 8) |
                       (static_cast<std::uint32_t>(data[4 * i + 2]) << 16) |
                       (static_cast<std::uint32_t>(data[4 * i + 3]) << 24);
    k1 *= c1;
    k1 = rotl32(k1, 15);
    k1 *= c2;
    h1 ^= k1;
    h1 = rotl32(h1, 13);
    h1 = h1 * 5 + 0xe6546b64;
  }

  const std::uint8_t* tail = data + nblocks * 4;
  std::uint32_t k1 = 0;
  switch (len & 3) {
    case 3: k1 ^= static_cast<std::uint32_t>(tail[2]) << 16; [[fallthrough]];
    case 2: k1 ^= static_cast<std::uint32_t>(tail[1]) << 8; [[fallthrough]];
    case 1:
      k1 ^= tail[0];
      k1 *= c1;
      k1 = rotl32(k1, 15);
      k1 *= c2;
      h1 ^= k1;
  }

  h1 ^= static_cast<std::uint32_t>(len);
  h1 ^= h1 >> 16;
  h1 *= 0x85ebca6b;
  h1 ^= h1 >> 13;
  h1 *= 0xc2b2ae35;
  h1 ^= h1 >> 16;
  return h1;
}

void hash_embed(std::span<const HashedItem> items, std::span<float> out, std::uint32_t seed) {
  if (out.empty()) throw std::invalid_argument("hash_embed: bucket count must be positive");
  // Summation order is fixed by sorting, so the output is independent of
  // the order items arrive in.
  std::vector<const HashedItem*> ordered;
  ordered.reserve(items.size());
  for (const auto& item : items) ordered.push_back(&item);
  std::sort(ordered.begin(), ordered.end(), [](const HashedItem* a, const HashedItem* b) {
    return a->key != b->key ? a->key < b->key : a->weight < b->weight;
  });
  std::vector<double> acc(out.size(), 0.0);
  for (const HashedItem* p : ordered) {
    const HashedItem& item = *p;
    const std::size_t index = murmur3_32(item.key, seed) % out.size();
    const bool negative = (murmur3_32(item.key, seed ^ kEmbedSignSeed) & 1u) != 0;
    acc[index] += negative ? -item.weight : item.weight;
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += static_cast<float>(acc[i]);
}

std::vector<float> hash_embed(std::span<const HashedItem> items, std::size_t buckets, std::uint32_t seed) {
  std::vector<float> out(buckets, 0.0f);
  hash_embed(items, std::span<float>(out), seed);
  return out;
}

}  // namespace ember
