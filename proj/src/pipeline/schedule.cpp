#include "ember/pipeline/schedule.hpp"

#include <algorithm>
#include <atomic>
#include <istream>
#include <thread>

#include "ember/pipeline/calendar.hpp"
#include "ember/pipeline/manifest.hpp"
#include "ember/pipeline/vt_report.hpp"

namespace ember::pipeline {

std::vector<TrackedFile> read_tracked_files(std::istream& in) {
  std::vector<TrackedFile> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto c = split_tabs(line);
    if (c.size() != 2) throw ManifestError("line " + std::to_string(n) + ": expected sha256<TAB>first_submission_date");
    TrackedFile f{c[0], 0};
    const bool numeric = !c[1].empty() && std::all_of(c[1].begin(), c[1].end(), [](char ch) { return ch >= '0' && ch <= '9'; });
    try {
      f.first_submission_date = numeric ? std::stoll(c[1]) : parse_utc(c[1]);
    } catch (const std::exception& e) {
      throw ManifestError("line " + std::to_string(n) + ": " + e.what());
    }
    out.push_back(std::move(f));
  }
  return out;
}

std::string_view task_name(TaskKind k) {
  switch (k) {
    case TaskKind::initial_fetch: return "initial_fetch";
    case TaskKind::relabel_fetch: return "relabel_fetch";
    case TaskKind::rescan: return "rescan";
  }
  return "initial_fetch";
}

std::vector<Task> plan_schedule(const std::vector<TrackedFile>& files, const ReportStore& store, std::int64_t now,
                                const SchedulePolicy& policy) {
  std::vector<Task> tasks;
  for (const auto& f : files) {
    const auto reports = store.reports(f.sha256);
    const auto rescans = store.rescan_requests(f.sha256);
    const std::int64_t first = f.first_submission_date;

    if (reports.empty()) {
      if (now >= first) tasks.push_back({f.sha256, TaskKind::initial_fetch, first, now - first > policy.initial_window});
      continue;
    }

    const std::int64_t last_request = rescans.empty() ? INT64_MIN : *std::max_element(rescans.begin(), rescans.end());
    const std::int64_t last_retrieval = reports.back().first;

    const std::int64_t relabel_due =
        std::max(first + policy.relabel_age, rescans.empty() ? first : last_request + policy.post_rescan_delay);
    const bool have_relabel = std::any_of(reports.begin(), reports.end(), [&](const auto& r) { return r.first >= relabel_due; });
    if (now >= relabel_due && !have_relabel) {
      tasks.push_back({f.sha256, TaskKind::relabel_fetch, relabel_due, false});
    }

    const std::int64_t rescan_due = first + policy.benign_rescan_age;
    if (now < rescan_due) continue;
    VtReport latest;
    try {
      latest = parse_vt_report(reports.back().second);
    } catch (const ReportError&) {
      continue;
    }
    const bool suspected_benign = latest.malicious_count() == 0;
    const bool stale = latest.last_analysis_date < rescan_due;
    if (!suspected_benign || !stale) continue;
    const bool requested_in_window = !rescans.empty() && last_request >= rescan_due;
    const bool request_ineffective =
        requested_in_window && last_retrieval > last_request && now >= last_request + policy.rescan_retry;
    if (!requested_in_window || request_ineffective) tasks.push_back({f.sha256, TaskKind::rescan, rescan_due, false});
  }
  return tasks;
}

ScheduleSummary run_schedule(const std::vector<Task>& tasks, VtClient& client, ReportStore& store, Clock& clock,
                             unsigned threads) {
  std::vector<Failure> outcomes(tasks.size(), Failure::none);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      const auto& t = tasks[i];
      outcomes[i] = t.kind == TaskKind::rescan ? request_rescan(client, store, t.sha256, clock)
                                               : fetch_report(client, store, t.sha256, clock);
    }
  };
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < std::max(1u, threads); ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  ScheduleSummary s;
  s.attempted = tasks.size();
  for (auto f : outcomes) {
    if (f == Failure::none) ++s.succeeded;
    else ++s.failures[std::string(failure_name(f))];
  }
  return s;
}

}  // namespace ember::pipeline
