#pragma once

// Append-only store of retrieved scan reports.
//
//   <dir>/reports-NNNNN.jsonl   one entry per line:
//       {"sha256", "retrieved_at", "kind": "report"|"rescan_request", "report"?}
//   <dir>/index.tsv             sha256 kind retrieved_at segment offset length
//   <dir>/dead_letter.jsonl     failed operations
//
// Entries are written and flushed before their index line, so a crash can
// only lose index lines; opening the store re-indexes any complete entries
// past the last indexed one and discards a torn final line.

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace ember::pipeline {

enum class EntryKind { report, rescan_request };

struct IndexEntry {
  EntryKind kind = EntryKind::report;
  std::int64_t retrieved_at = 0;
  std::uint32_t segment = 0;
  std::uint64_t offset = 0;
  std::uint64_t length = 0;

  bool operator==(const IndexEntry&) const = default;
};

struct DeadLetter {
  std::string sha256;
  std::string operation;  // "fetch", "rescan", "download"
  std::string error;      // "quota_exhausted", "not_found", "transport", ...
  std::string message;
  std::int64_t at = 0;
  int attempts = 0;
};

class ReportStore {
 public:
  explicit ReportStore(std::filesystem::path dir, std::uint64_t segment_bytes = 256ull << 20);

  void append_report(std::string_view sha256, const nlohmann::json& report, std::int64_t retrieved_at);
  void append_rescan_request(std::string_view sha256, std::int64_t requested_at);
  void append_dead_letter(const DeadLetter& d);

  // Every entry for a hash in append order; empty if unknown.
  std::vector<IndexEntry> entries(std::string_view sha256) const;
  std::vector<std::string> hashes() const;
  nlohmann::json load(const IndexEntry& e) const;

  // Reports in retrieval order (entries with kind report only).
  std::vector<std::pair<std::int64_t, nlohmann::json>> reports(std::string_view sha256) const;
  std::vector<std::int64_t> rescan_requests(std::string_view sha256) const;
  std::vector<DeadLetter> dead_letters() const;

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path segment_path(std::uint32_t s) const;
  void append_entry(std::string_view sha256, EntryKind kind, std::int64_t at, const nlohmann::json* report);
  void recover();

  std::filesystem::path dir_;
  std::uint64_t segment_bytes_;
  std::uint32_t segment_ = 0;
  std::uint64_t segment_size_ = 0;
  std::map<std::string, std::vector<IndexEntry>, std::less<>> index_;
  mutable std::shared_mutex mu_;
};

}  // namespace ember::pipeline
