#pragma once

// Antivirus scan reports. Both the flat form
//   {"sha256", "first_submission_date", "last_analysis_date", "last_analysis_results"}
// and the REST envelope {"data": {"id", "attributes": {...}}} are accepted.
// Dates may be epoch seconds or UTC date strings.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ember/features.hpp"

namespace ember::pipeline {

class ReportError : public std::runtime_error {
 public:
  ReportError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct VendorVerdict {
  std::string category;  // "malicious", "undetected", "type-unsupported", ...
  std::optional<std::string> result;

  bool operator==(const VendorVerdict&) const = default;
};

struct VtReport {
  std::string sha256;
  std::int64_t first_submission_date = 0;
  std::int64_t last_analysis_date = 0;
  std::vector<std::pair<std::string, VendorVerdict>> results;  // sorted by vendor name
  std::optional<std::string> md5, sha1, tlsh;
  std::optional<std::uint64_t> size;
  std::optional<FileType> file_type;

  std::size_t malicious_count() const;
  // Vendors whose category is one of malicious, suspicious, undetected, harmless.
  std::size_t verdict_count() const;
  std::string detection_ratio() const;

  bool operator==(const VtReport&) const = default;
};

VtReport parse_vt_report(const nlohmann::json& j);
VtReport parse_vt_report_text(std::string_view text);
nlohmann::json vt_report_to_json(const VtReport& r);

// File type from the report's type fields (flat "file_type", or
// "type_tag" / "type_tags" / "type_description"); nullopt if none apply.
std::optional<FileType> vt_file_type(const nlohmann::json& attributes);

// Warning text when the type derived from content disagrees with the report.
std::optional<std::string> cross_check_type(std::optional<FileType> reported, std::optional<FileType> detected);

}  // namespace ember::pipeline
