#pragma once

// Feature groups computable for any file, whatever its format.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ember/features.hpp"
#include "ember/pattern_set.hpp"

namespace ember {

inline constexpr std::size_t kByteEntropyWindow = 2048;
inline constexpr std::size_t kByteEntropyStep = 1024;
inline constexpr std::size_t kMinStringLength = 5;

// 256 counts, entry i = occurrences of byte value i.
std::vector<std::uint64_t> byte_histogram(std::span<const std::uint8_t> content);

// -sum p log2 p over nonzero entries; 0 for an all-zero histogram.
double shannon_entropy(std::span<const std::uint64_t> counts);

// 16x16 grid flattened row-major: row = entropy level of the window's
// high-nibble distribution (16 levels over [0, 8] bits), column = high
// nibble. Each window contributes its 16 nibble counts to its row.
// Inputs shorter than `window` are one window; the entropy is still
// normalised by `window`, as in earlier feature versions.
std::vector<std::uint64_t> byte_entropy_histogram(std::span<const std::uint8_t> content,
                                                  std::size_t window = kByteEntropyWindow,
                                                  std::size_t step = kByteEntropyStep);

StringFeatures string_features(std::span<const std::uint8_t> content, const PatternSet& patterns);

// size, entropy and magic4 only; the PE sub-block is filled by the PE extractor.
GeneralFeatures general_features(std::span<const std::uint8_t> content);

}  // namespace ember
