#include "ember/pipeline/vt_report.hpp"

#include <algorithm>
#include <cctype>

#include "ember/pipeline/calendar.hpp"

namespace ember::pipeline {
namespace {

using nlohmann::json;

std::int64_t read_time(const json& attrs, const char* key) {
  if (!attrs.contains(key)) throw ReportError(key, "missing");
  const auto& v = attrs[key];
  try {
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_string()) return parse_utc(v.get<std::string>());
  } catch (const TimeError& e) {
    throw ReportError(key, e.what());
  }
  throw ReportError(key, "expected epoch seconds or a date string");
}

std::optional<std::string> opt_string(const json& attrs, const char* key) {
  if (!attrs.contains(key) || attrs[key].is_null()) return std::nullopt;
  if (!attrs[key].is_string()) throw ReportError(key, "expected a string");
  return attrs[key].get<std::string>();
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool is_verdict(std::string_view category) {
  return category == "malicious" || category == "suspicious" || category == "undetected" || category == "harmless";
}

}  // namespace

std::size_t VtReport::malicious_count() const {
  return static_cast<std::size_t>(
      std::count_if(results.begin(), results.end(), [](const auto& r) { return r.second.category == "malicious"; }));
}

std::size_t VtReport::verdict_count() const {
  return static_cast<std::size_t>(
      std::count_if(results.begin(), results.end(), [](const auto& r) { return is_verdict(r.second.category); }));
}

std::string VtReport::detection_ratio() const {
  return std::to_string(malicious_count()) + "/" + std::to_string(verdict_count());
}

std::optional<FileType> vt_file_type(const json& attrs) {
  if (attrs.contains("file_type") && attrs["file_type"].is_string()) {
    if (auto t = parse_file_type(attrs["file_type"].get<std::string>())) return t;
  }
  std::vector<std::string> tags;
  if (attrs.contains("type_tag") && attrs["type_tag"].is_string()) tags.push_back(lower(attrs["type_tag"]));
  if (attrs.contains("type_tags") && attrs["type_tags"].is_array()) {
    for (const auto& t : attrs["type_tags"]) {
      if (t.is_string()) tags.push_back(lower(t));
    }
  }
  const std::string desc =
      attrs.contains("type_description") && attrs["type_description"].is_string() ? lower(attrs["type_description"]) : "";
  auto has = [&](std::string_view tag) { return std::find(tags.begin(), tags.end(), tag) != tags.end(); };

  if (has("android") || has("apk") || desc.find("android") != std::string::npos) return FileType::apk;
  if (has("elf") || desc.starts_with("elf")) return FileType::elf;
  if (has("pdf") || desc == "pdf") return FileType::pdf;
  const bool pe = has("peexe") || has("pedll") || has("pe") || desc.starts_with("win32") || desc.starts_with("win64");
  if (!pe) return std::nullopt;
  if (has("assembly") || has("dotnet") || has(".net") || desc.find(".net") != std::string::npos) return FileType::dotnet;
  if (has("64bits") || desc.starts_with("win64")) return FileType::win64;
  return FileType::win32;
}

std::optional<std::string> cross_check_type(std::optional<FileType> reported, std::optional<FileType> detected) {
  if (!reported) return std::nullopt;
  if (detected == reported) return std::nullopt;
  return "reported type " + std::string(file_type_name(*reported)) + " but content looks like " +
         (detected ? std::string(file_type_name(*detected)) : std::string("an unrecognized format"));
}

VtReport parse_vt_report(const json& root) {
  if (!root.is_object()) throw ReportError("", "report must be a JSON object");
  const json* attrs = &root;
  std::string id;
  if (root.contains("data")) {
    const auto& data = root["data"];
    if (!data.is_object() || !data.contains("attributes") || !data["attributes"].is_object())
      throw ReportError("data.attributes", "missing");
    attrs = &data["attributes"];
    if (data.contains("id") && data["id"].is_string()) id = data["id"];
  }
  VtReport r;
  r.sha256 = opt_string(*attrs, "sha256").value_or(id);
  if (r.sha256.size() != 64 ||
      !std::all_of(r.sha256.begin(), r.sha256.end(), [](char c) { return std::isxdigit(static_cast<unsigned char>(c)); }))
    throw ReportError("sha256", "expected 64 hex characters");
  r.sha256 = lower(r.sha256);
  r.first_submission_date = read_time(*attrs, "first_submission_date");
  r.last_analysis_date = read_time(*attrs, "last_analysis_date");
  if (r.last_analysis_date < r.first_submission_date)
    throw ReportError("last_analysis_date", "earlier than first_submission_date");

  if (!attrs->contains("last_analysis_results")) throw ReportError("last_analysis_results", "missing");
  const auto& results = (*attrs)["last_analysis_results"];
  if (!results.is_object()) throw ReportError("last_analysis_results", "expected an object");
  for (const auto& [vendor, v] : results.items()) {
    if (!v.is_object() || !v.contains("category") || !v["category"].is_string())
      throw ReportError("last_analysis_results." + vendor, "expected {category, result}");
    VendorVerdict verdict{v["category"].get<std::string>(), std::nullopt};
    if (v.contains("result") && v["result"].is_string()) verdict.result = v["result"].get<std::string>();
    r.results.emplace_back(vendor, std::move(verdict));
  }
  r.md5 = opt_string(*attrs, "md5");
  r.sha1 = opt_string(*attrs, "sha1");
  r.tlsh = opt_string(*attrs, "tlsh");
  if (attrs->contains("size")) {
    const auto& sz = (*attrs)["size"];
    if (!sz.is_number_integer() || sz.get<std::int64_t>() < 0) throw ReportError("size", "expected a nonnegative integer");
    r.size = (*attrs)["size"].get<std::uint64_t>();
  }
  r.file_type = vt_file_type(*attrs);
  return r;
}

VtReport parse_vt_report_text(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ReportError("", e.what());
  }
  return parse_vt_report(j);
}

json vt_report_to_json(const VtReport& r) {
  json j = json::object();
  j["sha256"] = r.sha256;
  j["first_submission_date"] = r.first_submission_date;
  j["last_analysis_date"] = r.last_analysis_date;
  json results = json::object();
  for (const auto& [vendor, v] : r.results) {
    results[vendor] = {{"category", v.category}, {"result", v.result ? json(*v.result) : json(nullptr)}};
  }
  j["last_analysis_results"] = std::move(results);
  if (r.md5) j["md5"] = *r.md5;
  if (r.sha1) j["sha1"] = *r.sha1;
  if (r.tlsh) j["tlsh"] = *r.tlsh;
  if (r.size) j["size"] = *r.size;
  if (r.file_type) j["file_type"] = std::string(file_type_name(*r.file_type));
  return j;
}

}  // namespace ember::pipeline
