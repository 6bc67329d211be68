#pragma once

// Fixed-width numeric vectors from raw feature documents.
//
// The layout table names each group, its width and its region. Groups in
// the "agnostic" region depend only on the four format-agnostic feature
// groups and form a prefix; everything after the prefix is zero unless the
// document carries parsed PE groups.

#include <cstddef>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ember/features.hpp"

namespace ember {

inline constexpr std::size_t kVectorWidth = 2568;
inline constexpr std::size_t kAgnosticWidth = 696;
// Scalars are clipped to +-kScalarClip before conversion to float.
inline constexpr double kScalarClip = 1e12;

class LayoutError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LayoutGroup {
  std::string name;
  std::size_t offset = 0;
  std::size_t width = 0;
  bool agnostic = false;
};

class FeatureLayout {
 public:
  static FeatureLayout parse(std::string_view text);
  static FeatureLayout load(const std::filesystem::path& path);
  static const FeatureLayout& default_v3();
  static std::string_view default_v3_text();

  const std::string& version() const { return version_; }
  std::span<const LayoutGroup> groups() const { return groups_; }
  std::size_t total_width() const { return total_; }
  std::size_t agnostic_width() const { return agnostic_; }
  // Throws LayoutError for unknown names.
  const LayoutGroup& group(std::string_view name) const;

 private:
  std::string version_;
  std::vector<LayoutGroup> groups_;
  std::size_t total_ = 0;
  std::size_t agnostic_ = 0;
};

// Throws std::invalid_argument if the document's pattern count differs
// from the layout's strings.patterns width.
std::vector<float> vectorize(const RawFeatures& raw, const FeatureLayout& layout = FeatureLayout::default_v3());
void vectorize_into(const RawFeatures& raw, std::span<float> out,
                    const FeatureLayout& layout = FeatureLayout::default_v3());

std::vector<float> truncate_agnostic(std::span<const float> v,
                                     const FeatureLayout& layout = FeatureLayout::default_v3());

}  // namespace ember
