#pragma once

// Which report fetches and rescans are due for the tracked files, given
// what the store already holds.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ember/pipeline/report_store.hpp"
#include "ember/pipeline/vt_client.hpp"

namespace ember::pipeline {

struct TrackedFile {
  std::string sha256;
  std::int64_t first_submission_date = 0;

  bool operator==(const TrackedFile&) const = default;
};

// "sha256<TAB>first_submission_date" per line; dates as epoch seconds or UTC strings.
std::vector<TrackedFile> read_tracked_files(std::istream& in);

struct SchedulePolicy {
  std::int64_t initial_window = 24 * 3600;
  std::int64_t relabel_age = 90 * 86400;
  std::int64_t benign_rescan_age = 30 * 86400;
  std::int64_t rescan_retry = 7 * 86400;
  std::int64_t post_rescan_delay = 86400;
};

enum class TaskKind { initial_fetch, relabel_fetch, rescan };

std::string_view task_name(TaskKind k);

struct Task {
  std::string sha256;
  TaskKind kind = TaskKind::initial_fetch;
  std::int64_t due = 0;
  bool late = false;  // initial fetch past its 24-hour window

  bool operator==(const Task&) const = default;
};

// Tasks due at `now`, in tracked-file order.
std::vector<Task> plan_schedule(const std::vector<TrackedFile>& files, const ReportStore& store, std::int64_t now,
                                const SchedulePolicy& policy = {});

struct ScheduleSummary {
  std::size_t attempted = 0;
  std::size_t succeeded = 0;
  std::map<std::string, std::size_t> failures;  // failure name -> count
};

// Runs the tasks on `threads` workers sharing the client's rate limiter.
ScheduleSummary run_schedule(const std::vector<Task>& tasks, VtClient& client, ReportStore& store, Clock& clock,
                             unsigned threads = 1);

}  // namespace ember::pipeline
