#pragma once

// Whole-file raw feature extraction: the four format-agnostic groups for
// every input plus the PE groups when the file parses as PE.

#include <optional>
#include <span>
#include <string>

#include "ember/features.hpp"
#include "ember/pattern_set.hpp"

namespace ember {

struct Extraction {
  RawFeatures raw;
  std::optional<FileType> detected_type;
  // Empty unless the file starts with "MZ" and the PE headers could not be read.
  std::string pe_failure;
};

Extraction extract(std::span<const std::uint8_t> content, const PatternSet& patterns = PatternSet::default_v3());

inline RawFeatures extract_raw(std::span<const std::uint8_t> content,
                               const PatternSet& patterns = PatternSet::default_v3()) {
  return extract(content, patterns).raw;
}

// Magic-byte classification. PE files need a successful header parse;
// "MZ" files whose headers are unreadable are not classified.
std::optional<FileType> detect_file_type(std::span<const std::uint8_t> content);

}  // namespace ember
