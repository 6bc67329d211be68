#pragma once

// Weekly threshold-bounded random selection with TLSH near-duplicate
// suppression, and the challenge-set exclusion that runs before it.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ember/features.hpp"
#include "ember/pipeline/calendar.hpp"
#include "ember/pipeline/labeling.hpp"
#include "ember/tlsh.hpp"

namespace ember::pipeline {

struct Candidate {
  std::string sha256;
  int week = 0;
  FileType file_type = FileType::win32;
  Label label = Label::indeterminate;
  std::uint64_t size = 0;
  std::optional<tlsh::Digest> tlsh;
  bool challenge = false;

  bool operator==(const Candidate&) const = default;
};

struct SelectionConfig {
  // Indexed by FileType, then {malicious, benign}.
  std::array<std::array<std::size_t, 2>, 6> thresholds{};
  std::uint64_t max_file_size = 100ull * 1024 * 1024;
  int dedup_threshold = 30;
  std::uint64_t seed = 0;

  std::size_t threshold(FileType t, Label l) const;
  std::size_t& threshold(FileType t, Label l);
  std::size_t weekly_total() const;

  // Standard weekly inclusion thresholds (50,500 files per week).
  static SelectionConfig standard(std::uint64_t seed);
};

struct BucketReport {
  FileType file_type = FileType::win32;
  Label label = Label::malicious;
  std::size_t threshold = 0;
  std::size_t available = 0;
  std::size_t selected = 0;
  std::size_t oversize = 0;
  std::size_t near_duplicate = 0;
  std::size_t without_digest = 0;  // selected without a TLSH digest to compare

  std::size_t shortfall() const { return selected < threshold ? threshold - selected : 0; }
  bool operator==(const BucketReport&) const = default;
};

struct WeekSelection {
  int week = 0;
  std::vector<Candidate> selected;  // in draw order
  std::vector<BucketReport> buckets;
  std::size_t discarded = 0;  // labels other than benign/malicious, or repeated hashes

  bool operator==(const WeekSelection&) const = default;
};

// All candidates must share one week (std::invalid_argument otherwise).
// The result depends only on the candidate set and the config; input order
// does not matter.
WeekSelection select_week(const std::vector<Candidate>& candidates, const SelectionConfig& config);

// Groups by week and runs select_week on each, in week order.
std::vector<WeekSelection> select_weeks(const std::vector<Candidate>& candidates, const SelectionConfig& config);

// Drops pool files that are themselves challenge files or lie within
// `threshold` of a challenge file from the same week.
std::vector<Candidate> build_challenge_exclusion(const std::vector<Candidate>& challenge,
                                                 const std::vector<Candidate>& pool, int threshold = 30);

struct ManifestEntry {
  std::string sha256;
  int week = 0;
  FileType file_type = FileType::win32;
  int label = 0;
  Split split = Split::train;

  bool operator==(const ManifestEntry&) const = default;
};

struct DatasetPlan {
  std::vector<ManifestEntry> manifest;  // challenge first, then the weekly selections
  std::vector<WeekSelection> weeks;
  std::size_t excluded_by_challenge = 0;
};

// Challenge files (flag set, malicious, within the size cap) go to the
// challenge split; everything else is filtered against them and selected.
DatasetPlan plan_dataset(const std::vector<Candidate>& candidates, const SelectionConfig& config);

}  // namespace ember::pipeline
