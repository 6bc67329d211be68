#include "ember/agnostic.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "ember/simd/kernels.hpp"

namespace ember {
namespace {

int entropy_level(const std::uint32_t nibbles[16], std::size_t window) {
  double h = 0.0;
  const double denom = static_cast<double>(window);
  for (int k = 0; k < 16; ++k) {
    if (nibbles[k] == 0) continue;
    const double p = static_cast<double>(nibbles[k]) / denom;
    h -= p * std::log2(p);
  }
  // 4-bit symbols carry at most 4 bits; scale to the 8-bit range, then to 16 levels.
  const int level = static_cast<int>(h * 2.0 * 2.0);
  return level >= 16 ? 15 : level;
}

void accumulate_row(std::vector<std::uint64_t>& grid, int level, const std::uint32_t nibbles[16]) {
  for (int k = 0; k < 16; ++k) grid[static_cast<std::size_t>(level) * 16 + k] += nibbles[k];
}

}  // namespace

std::vector<std::uint64_t> byte_histogram(std::span<const std::uint8_t> content) {
  // Four interleaved tables break the store-to-load dependency on runs of equal bytes.
  std::array<std::array<std::uint64_t, 256>, 4> tables{};
  std::size_t i = 0;
  for (; i + 4 <= content.size(); i += 4) {
    ++tables[0][content[i]];
    ++tables[1][content[i + 1]];
    ++tables[2][content[i + 2]];
    ++tables[3][content[i + 3]];
  }
  for (; i < content.size(); ++i) ++tables[0][content[i]];
  std::vector<std::uint64_t> out(256);
  for (int b = 0; b < 256; ++b) out[b] = tables[0][b] + tables[1][b] + tables[2][b] + tables[3][b];
  return out;
}

double shannon_entropy(std::span<const std::uint64_t> counts) {
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  if (total == 0) return 0.0;
  const double n = static_cast<double>(total);
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h <= 0.0 ? 0.0 : h;
}

std::vector<std::uint64_t> byte_entropy_histogram(std::span<const std::uint8_t> content, std::size_t window,
                                                  std::size_t step) {
  if (window == 0 || step == 0) throw std::invalid_argument("byte_entropy_histogram: window and step must be positive");
  const auto& k = simd::kernels();
  std::vector<std::uint64_t> grid(256, 0);
  std::uint32_t nibbles[16];

  if (content.size() < window) {
    k.nibble_histogram(content.data(), content.size(), nibbles);
    accumulate_row(grid, entropy_level(nibbles, window), nibbles);
    return grid;
  }

  const std::size_t windows = (content.size() - window) / step + 1;
  if (window % step != 0) {
    for (std::size_t w = 0; w < windows; ++w) {
      k.nibble_histogram(content.data() + w * step, window, nibbles);
      accumulate_row(grid, entropy_level(nibbles, window), nibbles);
    }
    return grid;
  }

  // Windows are unions of step-sized chunks; count each chunk once.
  const std::size_t per_window = window / step;
  const std::size_t chunks = windows - 1 + per_window;
  std::vector<std::array<std::uint32_t, 16>> chunk_counts(chunks);
  for (std::size_t c = 0; c < chunks; ++c) k.nibble_histogram(content.data() + c * step, step, chunk_counts[c].data());
  for (std::size_t w = 0; w < windows; ++w) {
    for (int b = 0; b < 16; ++b) {
      std::uint32_t s = 0;
      for (std::size_t c = 0; c < per_window; ++c) s += chunk_counts[w + c][b];
      nibbles[b] = s;
    }
    accumulate_row(grid, entropy_level(nibbles, window), nibbles);
  }
  return grid;
}

StringFeatures string_features(std::span<const std::uint8_t> content, const PatternSet& patterns) {
  StringFeatures out;
  const std::size_t n = content.size();
  std::vector<std::uint64_t> bits((n + 63) / 64, 0);
  if (n > 0) simd::kernels().printable_bitmap(content.data(), n, bits.data());

  std::size_t pos = 0;
  while (pos < n) {
    const std::uint64_t word = bits[pos / 64] >> (pos % 64);
    if (word == 0) {
      pos = (pos / 64 + 1) * 64;
      continue;
    }
    pos += static_cast<std::size_t>(std::countr_zero(word));
    const std::size_t start = pos;
    while (pos < n) {
      const unsigned offset = pos % 64;
      const std::uint64_t w = bits[pos / 64] >> offset;
      const auto ones = static_cast<std::size_t>(std::countr_one(w));
      const std::size_t avail = 64 - offset;
      pos += std::min(ones, avail);
      if (ones < avail) break;
    }
    const std::size_t len = pos - start;
    if (len >= kMinStringLength) {
      ++out.numstrings;
      out.printables += len;
      for (std::size_t i = start; i < pos; ++i) ++out.printabledist[content[i] - 0x20];
    }
  }

  out.avlength = out.numstrings == 0 ? 0.0 : static_cast<double>(out.printables) / static_cast<double>(out.numstrings);
  out.entropy = shannon_entropy(out.printabledist);

  const auto counts = patterns.count(content);
  out.string_counts.reserve(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) out.string_counts.emplace_back(patterns.patterns()[i].name, counts[i]);
  return out;
}

GeneralFeatures general_features(std::span<const std::uint8_t> content) {
  GeneralFeatures g;
  g.size = content.size();
  g.entropy = shannon_entropy(byte_histogram(content));
  for (std::size_t i = 0; i < 4 && i < content.size(); ++i) g.magic4[i] = content[i];
  return g;
}

}  // namespace ember
