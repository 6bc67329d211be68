#pragma once

// Partition of antivirus vendors into relationship clusters (shared
// engines, acquisitions, data-sharing agreements). Vendors not listed are
// their own singleton cluster, so lookup is total.
//
// Text format: one cluster per line, "cluster<TAB>vendor,vendor,...".
// Vendor names compare case-insensitively. '#' starts a comment line.

#include <cstddef>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ember::pipeline {

class VendorGraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AvVendorGraph {
 public:
  static AvVendorGraph parse(std::string_view text);
  static AvVendorGraph load(const std::filesystem::path& path);
  static const AvVendorGraph& default_graph();
  static std::string_view default_text();

  // Cluster name, or "vendor:<lowercased name>" for unlisted vendors.
  std::string cluster_of(std::string_view vendor) const;
  std::vector<std::string> cluster_names() const;
  std::vector<std::string> members(std::string_view cluster) const;

 private:
  std::map<std::string, std::string> cluster_by_vendor_;
  std::map<std::string, std::vector<std::string>> members_;
};

}  // namespace ember::pipeline
