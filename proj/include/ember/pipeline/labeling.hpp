#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

#include "ember/pipeline/vendor_graph.hpp"
#include "ember/pipeline/vt_report.hpp"

namespace ember::pipeline {

inline constexpr std::size_t kMaliciousClusters = 5;
inline constexpr std::int64_t kBenignRescanAge = 30 * 86400;
inline constexpr std::int64_t kInitialWindow = 24 * 3600;

enum class Label {
  benign,
  malicious,
  // Some detections, but fewer than five independent sources.
  indeterminate,
  // No detections yet, but the latest scan is younger than 30 days.
  pending,
};

std::string_view label_name(Label l);

struct LabelDecision {
  Label label = Label::indeterminate;
  std::size_t detections = 0;  // vendors with category "malicious" in the rescan
  std::size_t clusters = 0;    // distinct relationship clusters among them
  std::int64_t rescan_age = 0;  // rescan.last_analysis_date - initial.first_submission_date

  bool operator==(const LabelDecision&) const = default;
};

// Throws std::invalid_argument when the rescan predates the first submission.
LabelDecision label_file(const VtReport& initial, const VtReport& rescan, const AvVendorGraph& graph);

// Zero malicious verdicts initially and malicious in the end.
bool is_challenge(const VtReport& initial, Label final_label);

// Whether the initial report was retrieved within 24 hours of first submission.
bool within_initial_window(const VtReport& initial, std::int64_t retrieved_at);

}  // namespace ember::pipeline
