#include "ember/pipeline/report_store.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "ember/pipeline/manifest.hpp"

namespace ember::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string_view kind_name(EntryKind k) { return k == EntryKind::report ? "report" : "rescan_request"; }

EntryKind parse_kind(std::string_view s) {
  if (s == "report") return EntryKind::report;
  if (s == "rescan_request") return EntryKind::rescan_request;
  throw std::runtime_error("report store: unknown entry kind '" + std::string(s) + "'");
}

template <typename T>
T to_number(const std::string& s) {
  T v{};
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw std::runtime_error("report store: bad index field '" + s + "'");
  return v;
}

void write_index_line(const fs::path& index, std::string_view sha256, const IndexEntry& e) {
  std::ofstream out(index, std::ios::binary | std::ios::app);
  out << sha256 << '\t' << kind_name(e.kind) << '\t' << e.retrieved_at << '\t' << e.segment << '\t' << e.offset << '\t'
      << e.length << '\n';
  out.flush();
  if (!out) throw std::runtime_error("report store: cannot write " + index.string());
}

}  // namespace

ReportStore::ReportStore(fs::path dir, std::uint64_t segment_bytes) : dir_(std::move(dir)), segment_bytes_(segment_bytes) {
  fs::create_directories(dir_);
  std::ifstream in(dir_ / "index.tsv", std::ios::binary);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c = split_tabs(line);
    if (c.size() != 6) continue;  // torn final index line
    IndexEntry e{parse_kind(c[1]), to_number<std::int64_t>(c[2]), to_number<std::uint32_t>(c[3]),
                 to_number<std::uint64_t>(c[4]), to_number<std::uint64_t>(c[5])};
    segment_ = std::max(segment_, e.segment);
    index_[c[0]].push_back(e);
  }
  recover();
}

fs::path ReportStore::segment_path(std::uint32_t s) const {
  char name[32];
  std::snprintf(name, sizeof name, "reports-%05u.jsonl", s);
  return dir_ / name;
}

void ReportStore::recover() {
  while (fs::exists(segment_path(segment_ + 1))) ++segment_;
  const auto path = segment_path(segment_);
  if (!fs::exists(path)) {
    segment_size_ = 0;
    return;
  }
  std::uint64_t indexed_end = 0;
  for (const auto& [_, list] : index_) {
    for (const auto& e : list) {
      if (e.segment == segment_) indexed_end = std::max(indexed_end, e.offset + e.length);
    }
  }
  const auto size = fs::file_size(path);
  std::uint64_t good_end = indexed_end;
  if (size > indexed_end) {
    std::ifstream in(path, std::ios::binary);
    in.seekg(static_cast<std::streamoff>(indexed_end));
    std::string line;
    std::uint64_t offset = indexed_end;
    while (std::getline(in, line)) {
      if (in.eof()) break;  // no trailing newline: torn write
      const std::uint64_t length = line.size() + 1;
      try {
        const auto j = json::parse(line);
        IndexEntry e{parse_kind(j.at("kind").get<std::string>()), j.at("retrieved_at").get<std::int64_t>(), segment_,
                     offset, length};
        const auto sha = j.at("sha256").get<std::string>();
        index_[sha].push_back(e);
        write_index_line(dir_ / "index.tsv", sha, e);
      } catch (const std::exception&) {
        break;
      }
      offset += length;
      good_end = offset;
    }
  }
  if (size > good_end) fs::resize_file(path, good_end);
  segment_size_ = good_end;
}

void ReportStore::append_entry(std::string_view sha256, EntryKind kind, std::int64_t at, const json* report) {
  json j;
  j["sha256"] = sha256;
  j["retrieved_at"] = at;
  j["kind"] = kind_name(kind);
  if (report) j["report"] = *report;
  const std::string line = j.dump(-1, ' ', false, json::error_handler_t::replace) + "\n";

  std::unique_lock lock(mu_);
  if (segment_size_ > 0 && segment_size_ + line.size() > segment_bytes_) {
    ++segment_;
    segment_size_ = 0;
  }
  const auto path = segment_path(segment_);
  std::ofstream out(path, std::ios::binary | std::ios::app);
  out.write(line.data(), static_cast<std::streamsize>(line.size()));
  out.flush();
  if (!out) throw std::runtime_error("report store: cannot write " + path.string());
  IndexEntry e{kind, at, segment_, segment_size_, line.size()};
  segment_size_ += line.size();
  write_index_line(dir_ / "index.tsv", sha256, e);
  index_[std::string(sha256)].push_back(e);
}

void ReportStore::append_report(std::string_view sha256, const json& report, std::int64_t retrieved_at) {
  append_entry(sha256, EntryKind::report, retrieved_at, &report);
}

void ReportStore::append_rescan_request(std::string_view sha256, std::int64_t requested_at) {
  append_entry(sha256, EntryKind::rescan_request, requested_at, nullptr);
}

void ReportStore::append_dead_letter(const DeadLetter& d) {
  json j = {{"sha256", d.sha256}, {"operation", d.operation}, {"error", d.error},
            {"message", d.message}, {"at", d.at},               {"attempts", d.attempts}};
  std::unique_lock lock(mu_);
  std::ofstream out(dir_ / "dead_letter.jsonl", std::ios::binary | std::ios::app);
  out << j.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
}

std::vector<IndexEntry> ReportStore::entries(std::string_view sha256) const {
  std::shared_lock lock(mu_);
  const auto it = index_.find(sha256);
  return it == index_.end() ? std::vector<IndexEntry>{} : it->second;
}

std::vector<std::string> ReportStore::hashes() const {
  std::shared_lock lock(mu_);
  std::vector<std::string> out;
  for (const auto& [h, _] : index_) out.push_back(h);
  return out;
}

json ReportStore::load(const IndexEntry& e) const {
  std::ifstream in(segment_path(e.segment), std::ios::binary);
  in.seekg(static_cast<std::streamoff>(e.offset));
  std::string buf(e.length, '\0');
  in.read(buf.data(), static_cast<std::streamsize>(e.length));
  if (!in) throw std::runtime_error("report store: truncated segment " + segment_path(e.segment).string());
  return json::parse(buf);
}

std::vector<std::pair<std::int64_t, json>> ReportStore::reports(std::string_view sha256) const {
  std::vector<std::pair<std::int64_t, json>> out;
  for (const auto& e : entries(sha256)) {
    if (e.kind == EntryKind::report) out.emplace_back(e.retrieved_at, load(e).at("report"));
  }
  return out;
}

std::vector<std::int64_t> ReportStore::rescan_requests(std::string_view sha256) const {
  std::vector<std::int64_t> out;
  for (const auto& e : entries(sha256)) {
    if (e.kind == EntryKind::rescan_request) out.push_back(e.retrieved_at);
  }
  return out;
}

std::vector<DeadLetter> ReportStore::dead_letters() const {
  std::vector<DeadLetter> out;
  std::ifstream in(dir_ / "dead_letter.jsonl", std::ios::binary);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = json::parse(line, nullptr, false);
    if (j.is_discarded()) continue;
    out.push_back({j.value("sha256", ""), j.value("operation", ""), j.value("error", ""), j.value("message", ""),
                   j.value("at", std::int64_t{0}), j.value("attempts", 0)});
  }
  return out;
}

}  // namespace ember::pipeline
