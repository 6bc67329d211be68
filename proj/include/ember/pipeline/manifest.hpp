#pragma once

// Tab-separated manifests with a header row.
//
// Label manifest (one line per labeled file):
//   sha256 first_submission_date week file_type label challenge detections clusters detection_ratio size tlsh
// Selection manifest (one line per selected file):
//   sha256 week file_type label split

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "ember/pipeline/report_store.hpp"
#include "ember/pipeline/selection.hpp"
#include "ember/pipeline/vendor_graph.hpp"

namespace ember::pipeline {

class ManifestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LabeledFile {
  Candidate candidate;
  std::int64_t first_submission_date = 0;
  LabelDecision decision;
  std::string detection_ratio;

  bool operator==(const LabeledFile&) const = default;
};

void write_label_manifest(std::ostream& out, const std::vector<LabeledFile>& rows);
std::vector<LabeledFile> read_label_manifest(std::istream& in);

void write_selection_manifest(std::ostream& out, const std::vector<ManifestEntry>& rows);
std::vector<ManifestEntry> read_selection_manifest(std::istream& in);

struct SkippedFile {
  std::string sha256;
  std::string reason;
};

// Labels every hash in the store from its earliest and latest reports.
// Files without a usable type, with no report, or outside the collection
// window are returned in `skipped` instead.
std::vector<LabeledFile> label_store(const ReportStore& store, const AvVendorGraph& graph,
                                     std::int64_t collection_start, std::vector<SkippedFile>* skipped = nullptr);

std::vector<std::string> split_tabs(const std::string& line);

}  // namespace ember::pipeline
