#include "ember/pipeline/manifest.hpp"

#include <charconv>
#include <istream>
#include <ostream>

#include "ember/pipeline/vt_report.hpp"

namespace ember::pipeline {
namespace {

constexpr const char* kLabelHeader =
    "sha256\tfirst_submission_date\tweek\tfile_type\tlabel\tchallenge\tdetections\tclusters\tdetection_ratio\tsize\ttlsh";
constexpr const char* kSelectionHeader = "sha256\tweek\tfile_type\tlabel\tsplit";

template <typename T>
T number(const std::string& s, std::size_t line, const char* field) {
  T v{};
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw ManifestError("line " + std::to_string(line) + ": bad " + field + " '" + s + "'");
  return v;
}

FileType type_field(const std::string& s, std::size_t line) {
  const auto t = parse_file_type(s);
  if (!t) throw ManifestError("line " + std::to_string(line) + ": unknown file type '" + s + "'");
  return *t;
}

Label label_field(const std::string& s, std::size_t line) {
  for (Label l : {Label::benign, Label::malicious, Label::indeterminate, Label::pending}) {
    if (s == label_name(l)) return l;
  }
  throw ManifestError("line " + std::to_string(line) + ": unknown label '" + s + "'");
}

template <typename F>
void each_row(std::istream& in, const char* header, std::size_t columns, F&& f) {
  std::string line;
  std::size_t n = 0;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!seen_header) {
      seen_header = true;
      if (line != header) throw ManifestError("line 1: unexpected header");
      continue;
    }
    auto cols = split_tabs(line);
    if (cols.size() != columns)
      throw ManifestError("line " + std::to_string(n) + ": expected " + std::to_string(columns) + " columns");
    f(cols, n);
  }
}

}  // namespace

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

void write_label_manifest(std::ostream& out, const std::vector<LabeledFile>& rows) {
  out << kLabelHeader << '\n';
  for (const auto& r : rows) {
    const auto& c = r.candidate;
    out << c.sha256 << '\t' << r.first_submission_date << '\t' << c.week << '\t' << file_type_tag(c.file_type) << '\t'
        << label_name(c.label) << '\t' << (c.challenge ? 1 : 0) << '\t' << r.decision.detections << '\t'
        << r.decision.clusters << '\t' << r.detection_ratio << '\t' << c.size << '\t'
        << (c.tlsh ? c.tlsh->to_string() : std::string("-")) << '\n';
  }
}

std::vector<LabeledFile> read_label_manifest(std::istream& in) {
  std::vector<LabeledFile> rows;
  each_row(in, kLabelHeader, 11, [&](const std::vector<std::string>& c, std::size_t n) {
    LabeledFile r;
    r.candidate.sha256 = c[0];
    r.first_submission_date = number<std::int64_t>(c[1], n, "first_submission_date");
    r.candidate.week = number<int>(c[2], n, "week");
    r.candidate.file_type = type_field(c[3], n);
    r.candidate.label = label_field(c[4], n);
    r.decision.label = r.candidate.label;
    r.candidate.challenge = number<int>(c[5], n, "challenge") != 0;
    r.decision.detections = number<std::size_t>(c[6], n, "detections");
    r.decision.clusters = number<std::size_t>(c[7], n, "clusters");
    r.detection_ratio = c[8];
    r.candidate.size = number<std::uint64_t>(c[9], n, "size");
    if (c[10] != "-") {
      r.candidate.tlsh = tlsh::Digest::parse(c[10]);
      if (!r.candidate.tlsh) throw ManifestError("line " + std::to_string(n) + ": bad tlsh digest");
    }
    rows.push_back(std::move(r));
  });
  return rows;
}

void write_selection_manifest(std::ostream& out, const std::vector<ManifestEntry>& rows) {
  out << kSelectionHeader << '\n';
  for (const auto& r : rows) {
    out << r.sha256 << '\t' << r.week << '\t' << file_type_tag(r.file_type) << '\t' << r.label << '\t'
        << split_name(r.split) << '\n';
  }
}

std::vector<ManifestEntry> read_selection_manifest(std::istream& in) {
  std::vector<ManifestEntry> rows;
  each_row(in, kSelectionHeader, 5, [&](const std::vector<std::string>& c, std::size_t n) {
    ManifestEntry e;
    e.sha256 = c[0];
    e.week = number<int>(c[1], n, "week");
    e.file_type = type_field(c[2], n);
    e.label = number<int>(c[3], n, "label");
    try {
      e.split = parse_split(c[4]);
    } catch (const std::invalid_argument&) {
      throw ManifestError("line " + std::to_string(n) + ": unknown split '" + c[4] + "'");
    }
    rows.push_back(std::move(e));
  });
  return rows;
}

std::vector<LabeledFile> label_store(const ReportStore& store, const AvVendorGraph& graph,
                                     std::int64_t collection_start, std::vector<SkippedFile>* skipped) {
  std::vector<LabeledFile> out;
  auto skip = [&](const std::string& h, std::string why) {
    if (skipped) skipped->push_back({h, std::move(why)});
  };
  for (const auto& h : store.hashes()) {
    const auto reports = store.reports(h);
    if (reports.empty()) {
      skip(h, "no report");
      continue;
    }
    try {
      const auto initial = parse_vt_report(reports.front().second);
      const auto latest = parse_vt_report(reports.back().second);
      LabeledFile r;
      r.decision = label_file(initial, latest, graph);
      r.first_submission_date = initial.first_submission_date;
      r.detection_ratio = latest.detection_ratio();
      auto& c = r.candidate;
      c.sha256 = h;
      c.week = week_of(initial.first_submission_date, collection_start);
      const auto type = latest.file_type ? latest.file_type : initial.file_type;
      if (!type) {
        skip(h, "report has no recognized file type");
        continue;
      }
      c.file_type = *type;
      c.label = r.decision.label;
      c.size = latest.size.value_or(initial.size.value_or(0));
      if (latest.tlsh) c.tlsh = tlsh::Digest::parse(*latest.tlsh);
      c.challenge = is_challenge(initial, c.label);
      out.push_back(std::move(r));
    } catch (const std::exception& e) {
      skip(h, e.what());
    }
  }
  return out;
}

}  // namespace ember::pipeline
