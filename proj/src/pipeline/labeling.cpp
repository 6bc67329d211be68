#include "ember/pipeline/labeling.hpp"

#include <set>
#include <stdexcept>

namespace ember::pipeline {

std::string_view label_name(Label l) {
  switch (l) {
    case Label::benign: return "benign";
    case Label::malicious: return "malicious";
    case Label::indeterminate: return "indeterminate";
    case Label::pending: return "pending";
  }
  return "indeterminate";
}

LabelDecision label_file(const VtReport& initial, const VtReport& rescan, const AvVendorGraph& graph) {
  if (rescan.last_analysis_date < initial.first_submission_date)
    throw std::invalid_argument("label_file: rescan of " + rescan.sha256 + " predates its first submission");
  LabelDecision d;
  d.rescan_age = rescan.last_analysis_date - initial.first_submission_date;
  std::set<std::string> clusters;
  for (const auto& [vendor, verdict] : rescan.results) {
    if (verdict.category != "malicious") continue;
    ++d.detections;
    clusters.insert(graph.cluster_of(vendor));
  }
  d.clusters = clusters.size();
  if (d.clusters >= kMaliciousClusters) {
    d.label = Label::malicious;
  } else if (d.detections == 0) {
    d.label = d.rescan_age >= kBenignRescanAge ? Label::benign : Label::pending;
  } else {
    d.label = Label::indeterminate;
  }
  return d;
}

bool is_challenge(const VtReport& initial, Label final_label) {
  return initial.malicious_count() == 0 && final_label == Label::malicious;
}

bool within_initial_window(const VtReport& initial, std::int64_t retrieved_at) {
  return retrieved_at >= initial.first_submission_date && retrieved_at - initial.first_submission_date <= kInitialWindow;
}

}  // namespace ember::pipeline
