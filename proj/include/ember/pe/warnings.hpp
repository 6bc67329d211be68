#pragma once

// Canonical categories for parser warnings. A warning string belongs to
// the category whose prefix is the longest one it starts with; anything
// else lands in the reserved "other" category.
//
// Text format: "name<TAB>prefix" per line, an optional "version<TAB>tag"
// line, '#' comment lines. The "other" entry carries an empty prefix.

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ember::pe {

inline constexpr std::size_t kWarningCategories = 88;

class WarningCatalogError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class WarningCatalog {
 public:
  struct Category {
    std::string name;
    std::string prefix;
  };

  static WarningCatalog parse(std::string_view text);
  static WarningCatalog load(const std::filesystem::path& path);
  static const WarningCatalog& default_v3();
  static std::string_view default_v3_text();

  const std::string& version() const { return version_; }
  std::span<const Category> categories() const { return categories_; }
  std::size_t size() const { return categories_.size(); }
  std::size_t other_index() const { return other_; }

  std::size_t categorize(std::string_view warning) const;
  // One count per category; the counts sum to warnings.size().
  std::vector<std::uint64_t> canonicalize(std::span<const std::string> warnings) const;

 private:
  std::string version_;
  std::vector<Category> categories_;
  std::size_t other_ = 0;
};

}  // namespace ember::pe
