#pragma once

// A record store is a directory of metadata-record JSONL files named
// "<anything>_<split>.jsonl", where <split> is train, test or challenge.
// The file type of each record comes from its own "file_type" field.

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ember/features.hpp"
#include "ember/pipeline/calendar.hpp"

namespace ember::pipeline {

class FilterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class LabelKind { all, malicious_benign, family, tag };

struct SplitFilter {
  std::optional<Split> split;               // nullopt: every split
  std::optional<std::set<FileType>> types;  // nullopt: every type
  LabelKind labels = LabelKind::all;
  std::string tag_category;                 // for LabelKind::tag

  bool matches_split(Split s) const { return !split || *split == s; }
  bool matches(const FileMetadataRecord& r) const;
};

// "train" | "test" | "challenge" | "all"
std::optional<Split> parse_split_filter(std::string_view s);
// "all", "pe" (Win32, Win64 and .NET) or a single file type name.
std::optional<std::set<FileType>> parse_type_filter(std::string_view s);
// "all", "malicious-benign", "family", or a tag category ("behavior", "packer", ...).
std::pair<LabelKind, std::string> parse_label_filter(std::string_view s);
SplitFilter make_filter(std::string_view split, std::string_view type, std::string_view labels);

// Store files in name order, each with the split its name encodes.
std::vector<std::pair<std::filesystem::path, Split>> store_files(const std::filesystem::path& root);

using RecordSink = std::function<void(const FileMetadataRecord&, Split)>;

// Streams matching records in file order; returns how many matched.
// Malformed lines raise RecordError with the file and line in the message.
std::size_t load_split(const std::filesystem::path& root, const SplitFilter& filter, const RecordSink& sink);

// Appends records to "<root>/<prefix>_<split>.jsonl".
class RecordStoreWriter {
 public:
  explicit RecordStoreWriter(std::filesystem::path root);
  void append(const FileMetadataRecord& record, Split split, std::string_view prefix);

 private:
  std::filesystem::path root_;
};

// Family and tag statistics over a record stream.
class Demographics {
 public:
  struct TagStats {
    std::size_t tagged_files = 0;
    std::size_t distinct_tags = 0;
    bool operator==(const TagStats&) const = default;
  };

  void add(const FileMetadataRecord& r);

  const std::map<std::string, std::size_t>& family_counts() const { return families_; }
  // family size -> number of families of that size
  std::map<std::size_t, std::size_t> family_size_histogram() const;
  std::size_t families_with_at_least(std::size_t n) const;
  std::size_t families_with_at_most(std::size_t n) const;
  TagStats tag_stats(std::string_view category) const;
  std::size_t records() const { return records_; }
  std::size_t malicious() const { return malicious_; }
  std::size_t with_family() const { return with_family_; }

  nlohmann::ordered_json to_json() const;

 private:
  std::map<std::string, std::size_t> families_;
  std::map<std::string, std::size_t> tagged_files_;
  std::map<std::string, std::set<std::string>> tags_;
  std::size_t records_ = 0, malicious_ = 0, with_family_ = 0;
};

}  // namespace ember::pipeline
