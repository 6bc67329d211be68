#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ember {

enum class PatternKind { literal, regex };

struct Pattern {
  std::string name;
  PatternKind kind = PatternKind::literal;
  std::string pattern;
};

class PatternSetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Named string patterns counted over whole files. Matching is ASCII
// case-insensitive; counts are of non-overlapping, leftmost matches.
//
// Text format, one pattern per line:
//   name<TAB>kind<TAB>pattern      kind is "literal" or "regex"
// plus an optional "version<TAB>tag" line. '#' starts a comment line.
class PatternSet {
 public:
  static PatternSet parse(std::string_view text);
  static PatternSet load(const std::filesystem::path& path);

  // The frozen 76-pattern set for feature version 3.
  static const PatternSet& default_v3();
  static std::string_view default_v3_text();

  const std::string& version() const { return version_; }
  std::span<const Pattern> patterns() const { return patterns_; }
  std::size_t size() const { return patterns_.size(); }

  // One count per pattern, in pattern order.
  std::vector<std::uint64_t> count(std::span<const std::uint8_t> content) const;

 private:
  struct Compiled;
  std::string version_;
  std::vector<Pattern> patterns_;
  std::shared_ptr<const Compiled> compiled_;
};

}  // namespace ember
