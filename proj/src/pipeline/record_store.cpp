#include "ember/pipeline/record_store.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <tuple>

#include "ember/record.hpp"

namespace ember::pipeline {

namespace fs = std::filesystem;

bool SplitFilter::matches(const FileMetadataRecord& r) const {
  if (types && !types->count(r.file_type)) return false;
  switch (labels) {
    case LabelKind::all: return true;
    case LabelKind::malicious_benign: return r.label == 0 || r.label == 1;
    case LabelKind::family: return r.family.has_value();
    case LabelKind::tag: return !r.tags(tag_category).empty();
  }
  return false;
}

std::optional<Split> parse_split_filter(std::string_view s) {
  if (s == "all") return std::nullopt;
  try {
    return parse_split(s);
  } catch (const std::invalid_argument&) {
    throw FilterError("unknown split filter '" + std::string(s) + "' (train, test, challenge, all)");
  }
}

std::optional<std::set<FileType>> parse_type_filter(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "all") return std::nullopt;
  if (lower == "pe") return std::set<FileType>{FileType::win32, FileType::win64, FileType::dotnet};
  if (const auto t = parse_file_type(s)) return std::set<FileType>{*t};
  throw FilterError("unknown file type filter '" + std::string(s) + "' (all, pe, win32, win64, dotnet, apk, elf, pdf)");
}

std::pair<LabelKind, std::string> parse_label_filter(std::string_view s) {
  if (s == "all") return {LabelKind::all, ""};
  if (s == "malicious-benign") return {LabelKind::malicious_benign, ""};
  if (s == "family") return {LabelKind::family, ""};
  for (std::string_view c : kTagCategories) {
    if (s == c) return {LabelKind::tag, std::string(c)};
  }
  throw FilterError("unknown label filter '" + std::string(s) +
                    "' (all, malicious-benign, family, behavior, file_property, packer, exploit, group)");
}

SplitFilter make_filter(std::string_view split, std::string_view type, std::string_view labels) {
  SplitFilter f;
  f.split = parse_split_filter(split);
  f.types = parse_type_filter(type);
  std::tie(f.labels, f.tag_category) = parse_label_filter(labels);
  return f;
}

std::vector<std::pair<fs::path, Split>> store_files(const fs::path& root) {
  std::vector<std::pair<fs::path, Split>> out;
  if (!fs::is_directory(root)) throw std::runtime_error("record store not found: " + root.string());
  for (const auto& e : fs::directory_iterator(root)) {
    if (!e.is_regular_file() || e.path().extension() != ".jsonl") continue;
    const auto stem = e.path().stem().string();
    const auto us = stem.rfind('_');
    const std::string tail = us == std::string::npos ? stem : stem.substr(us + 1);
    for (Split s : {Split::train, Split::test, Split::challenge}) {
      if (tail == split_name(s)) out.emplace_back(e.path(), s);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t load_split(const fs::path& root, const SplitFilter& filter, const RecordSink& sink) {
  std::size_t matched = 0;
  for (const auto& [path, split] : store_files(root)) {
    if (!filter.matches_split(split)) continue;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
      ++n;
      if (line.empty()) continue;
      FileMetadataRecord r;
      try {
        r = parse_record(line);
      } catch (const RecordError& e) {
        throw RecordError(e.kind(), e.field(), path.string() + ":" + std::to_string(n) + ": " + e.what());
      }
      if (!filter.matches(r)) continue;
      ++matched;
      sink(r, split);
    }
  }
  return matched;
}

RecordStoreWriter::RecordStoreWriter(fs::path root) : root_(std::move(root)) { fs::create_directories(root_); }

void RecordStoreWriter::append(const FileMetadataRecord& record, Split split, std::string_view prefix) {
  const auto path = root_ / (std::string(prefix) + "_" + std::string(split_name(split)) + ".jsonl");
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << serialize_record(record) << '\n';
}

void Demographics::add(const FileMetadataRecord& r) {
  ++records_;
  if (r.label == 1) ++malicious_;
  if (r.family) {
    ++with_family_;
    ++families_[*r.family];
  }
  for (std::string_view c : kTagCategories) {
    const auto& tags = r.tags(c);
    if (tags.empty()) continue;
    ++tagged_files_[std::string(c)];
    tags_[std::string(c)].insert(tags.begin(), tags.end());
  }
}

std::map<std::size_t, std::size_t> Demographics::family_size_histogram() const {
  std::map<std::size_t, std::size_t> h;
  for (const auto& [_, n] : families_) ++h[n];
  return h;
}

std::size_t Demographics::families_with_at_least(std::size_t n) const {
  return static_cast<std::size_t>(std::count_if(families_.begin(), families_.end(), [n](const auto& f) { return f.second >= n; }));
}

std::size_t Demographics::families_with_at_most(std::size_t n) const {
  return static_cast<std::size_t>(std::count_if(families_.begin(), families_.end(), [n](const auto& f) { return f.second <= n; }));
}

Demographics::TagStats Demographics::tag_stats(std::string_view category) const {
  TagStats s;
  const std::string key(category);
  if (const auto it = tagged_files_.find(key); it != tagged_files_.end()) s.tagged_files = it->second;
  if (const auto it = tags_.find(key); it != tags_.end()) s.distinct_tags = it->second.size();
  return s;
}

nlohmann::ordered_json Demographics::to_json() const {
  nlohmann::ordered_json j;
  j["records"] = records_;
  j["malicious"] = malicious_;
  j["with_family"] = with_family_;
  j["unique_families"] = families_.size();
  j["families_10_or_more"] = families_with_at_least(10);
  j["families_5_or_fewer"] = families_with_at_most(5);
  nlohmann::ordered_json hist = nlohmann::ordered_json::array();
  for (const auto& [size, count] : family_size_histogram()) hist.push_back({size, count});
  j["family_size_histogram"] = std::move(hist);
  nlohmann::ordered_json tags = nlohmann::ordered_json::object();
  for (std::string_view c : kTagCategories) {
    const auto s = tag_stats(c);
    tags[std::string(c)] = {{"tagged_files", s.tagged_files}, {"distinct_tags", s.distinct_tags}};
  }
  j["tags"] = std::move(tags);
  return j;
}

}  // namespace ember::pipeline
