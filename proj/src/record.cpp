#include "ember/record.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ember/pattern_set.hpp"
#include "ember/pe/constants.hpp"
#include "text_util.hpp"

namespace ember {

using nlohmann::ordered_json;
using Kind = RecordError::Kind;

namespace {

std::string join(const std::string& parent, std::string_view key) {
  return parent.empty() ? std::string(key) : parent + "." + std::string(key);
}

const ordered_json& require(const ordered_json& obj, std::string_view key, const std::string& parent) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw RecordError(Kind::missing_key, join(parent, key), "missing key " + join(parent, key));
  return *it;
}

[[noreturn]] void wrong_type(const std::string& path, std::string_view expected) {
  throw RecordError(Kind::wrong_type, path, path + ": expected " + std::string(expected));
}

const ordered_json& require_object(const ordered_json& obj, std::string_view key, const std::string& parent) {
  const auto& v = require(obj, key, parent);
  if (!v.is_object()) wrong_type(join(parent, key), "object");
  return v;
}

const ordered_json& require_array(const ordered_json& obj, std::string_view key, const std::string& parent) {
  const auto& v = require(obj, key, parent);
  if (!v.is_array()) wrong_type(join(parent, key), "array");
  return v;
}

std::uint64_t as_u64(const ordered_json& v, const std::string& path) {
  if (!v.is_number_unsigned()) {
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
    wrong_type(path, "nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

std::int64_t as_i64(const ordered_json& v, const std::string& path) {
  if (v.is_number_unsigned()) {
    const auto u = v.get<std::uint64_t>();
    if (u > static_cast<std::uint64_t>(INT64_MAX)) wrong_type(path, "64-bit signed integer");
    return static_cast<std::int64_t>(u);
  }
  if (!v.is_number_integer()) wrong_type(path, "integer");
  return v.get<std::int64_t>();
}

double as_double(const ordered_json& v, const std::string& path) {
  if (!v.is_number()) wrong_type(path, "number");
  return v.get<double>();
}

std::string as_string(const ordered_json& v, const std::string& path) {
  if (!v.is_string()) wrong_type(path, "string");
  return v.get<std::string>();
}

std::uint64_t get_u64(const ordered_json& obj, std::string_view key, const std::string& parent) {
  return as_u64(require(obj, key, parent), join(parent, key));
}

std::int64_t get_i64(const ordered_json& obj, std::string_view key, const std::string& parent) {
  return as_i64(require(obj, key, parent), join(parent, key));
}

double get_double(const ordered_json& obj, std::string_view key, const std::string& parent) {
  return as_double(require(obj, key, parent), join(parent, key));
}

std::string get_string(const ordered_json& obj, std::string_view key, const std::string& parent) {
  return as_string(require(obj, key, parent), join(parent, key));
}

std::vector<std::uint64_t> get_u64_array(const ordered_json& obj, std::string_view key, const std::string& parent) {
  const auto& arr = require_array(obj, key, parent);
  const std::string path = join(parent, key);
  std::vector<std::uint64_t> out;
  out.reserve(arr.size());
  for (const auto& e : arr) out.push_back(as_u64(e, path));
  return out;
}

std::vector<std::string> get_string_array(const ordered_json& obj, std::string_view key, const std::string& parent) {
  const auto& arr = require_array(obj, key, parent);
  const std::string path = join(parent, key);
  std::vector<std::string> out;
  out.reserve(arr.size());
  for (const auto& e : arr) out.push_back(as_string(e, path));
  return out;
}

ordered_json strings_to_json(const StringFeatures& s) {
  ordered_json j = ordered_json::object();
  j["numstrings"] = s.numstrings;
  j["avlength"] = s.avlength;
  j["printabledist"] = s.printabledist;
  j["printables"] = s.printables;
  j["entropy"] = s.entropy;
  ordered_json counts = ordered_json::object();
  for (const auto& [name, n] : s.string_counts) counts[name] = n;
  j["string_counts"] = std::move(counts);
  return j;
}

StringFeatures strings_from_json(const ordered_json& j) {
  const std::string p = "strings";
  StringFeatures s;
  s.numstrings = get_u64(j, "numstrings", p);
  s.avlength = get_double(j, "avlength", p);
  s.printabledist = get_u64_array(j, "printabledist", p);
  s.printables = get_u64(j, "printables", p);
  s.entropy = get_double(j, "entropy", p);
  const auto& counts = require_object(j, "string_counts", p);
  for (const auto& [name, v] : counts.items()) s.string_counts.emplace_back(name, as_u64(v, p + ".string_counts." + name));
  return s;
}

ordered_json general_to_json(const GeneralFeatures& g) {
  ordered_json j = ordered_json::object();
  j["size"] = g.size;
  j["entropy"] = g.entropy;
  j["magic4"] = g.magic4;
  if (g.pe) {
    j["vsize"] = g.pe->vsize;
    j["has_relocs"] = g.pe->has_relocs;
    j["has_dynamic_relocs"] = g.pe->has_dynamic_relocs;
    j["symbols"] = g.pe->symbols;
  }
  return j;
}

GeneralFeatures general_from_json(const ordered_json& j) {
  const std::string p = "general";
  GeneralFeatures g;
  g.size = get_u64(j, "size", p);
  g.entropy = get_double(j, "entropy", p);
  g.magic4 = get_u64_array(j, "magic4", p);
  if (j.contains("vsize") || j.contains("has_relocs") || j.contains("has_dynamic_relocs") || j.contains("symbols")) {
    PeGeneralFeatures pe;
    pe.vsize = get_u64(j, "vsize", p);
    pe.has_relocs = get_u64(j, "has_relocs", p);
    pe.has_dynamic_relocs = get_u64(j, "has_dynamic_relocs", p);
    pe.symbols = get_u64(j, "symbols", p);
    g.pe = pe;
  }
  return g;
}

#define EMBER_DOS_FIELDS(X)                                                                                      \
  X(e_magic) X(e_cblp) X(e_cp) X(e_crlc) X(e_cparhdr) X(e_minalloc) X(e_maxalloc) X(e_ss) X(e_sp) X(e_csum) \
      X(e_ip) X(e_cs) X(e_lfarlc) X(e_ovno) X(e_oemid) X(e_oeminfo) X(e_lfanew)

#define EMBER_OPTIONAL_SCALARS_A(X)                                                                      \
  X(major_image_version) X(minor_image_version) X(major_linker_version) X(minor_linker_version)        \
      X(major_operating_system_version) X(minor_operating_system_version) X(major_subsystem_version)   \
          X(minor_subsystem_version) X(sizeof_code) X(sizeof_headers) X(sizeof_image)                    \
              X(sizeof_initialized_data) X(sizeof_uninitialized_data) X(sizeof_stack_reserve)            \
                  X(sizeof_stack_commit) X(sizeof_heap_reserve) X(sizeof_heap_commit)                    \
                      X(address_of_entrypoint) X(base_of_code) X(base_of_data) X(image_base)             \
                          X(section_alignment) X(checksum) X(number_of_rvas_and_sizes)

ordered_json header_to_json(const HeaderGroup& h) {
  ordered_json coff = ordered_json::object();
  coff["timestamp"] = h.coff.timestamp;
  coff["machine"] = h.coff.machine;
  coff["number_of_sections"] = h.coff.number_of_sections;
  coff["number_of_symbols"] = h.coff.number_of_symbols;
  coff["sizeof_optional_header"] = h.coff.sizeof_optional_header;
  coff["pointer_to_symbol_table"] = h.coff.pointer_to_symbol_table;
  coff["characteristics"] = h.coff.characteristics;

  ordered_json opt = ordered_json::object();
  opt["magic"] = h.optional.magic;
  opt["subsystem"] = h.optional.subsystem;
#define X(f) opt[#f] = h.optional.f;
  EMBER_OPTIONAL_SCALARS_A(X)
#undef X
  opt["dll_characteristics"] = h.optional.dll_characteristics;

  ordered_json dos = ordered_json::object();
#define X(f) dos[#f] = h.dos.f;
  EMBER_DOS_FIELDS(X)
#undef X

  ordered_json j = ordered_json::object();
  j["coff"] = std::move(coff);
  j["optional"] = std::move(opt);
  j["dos"] = std::move(dos);
  return j;
}

HeaderGroup header_from_json(const ordered_json& j) {
  HeaderGroup h;
  const auto& coff = require_object(j, "coff", "header");
  const std::string pc = "header.coff";
  h.coff.timestamp = get_u64(coff, "timestamp", pc);
  h.coff.machine = get_string(coff, "machine", pc);
  h.coff.number_of_sections = get_u64(coff, "number_of_sections", pc);
  h.coff.number_of_symbols = get_u64(coff, "number_of_symbols", pc);
  h.coff.sizeof_optional_header = get_u64(coff, "sizeof_optional_header", pc);
  h.coff.pointer_to_symbol_table = get_u64(coff, "pointer_to_symbol_table", pc);
  h.coff.characteristics = get_string_array(coff, "characteristics", pc);

  const auto& opt = require_object(j, "optional", "header");
  const std::string po = "header.optional";
  h.optional.magic = get_u64(opt, "magic", po);
  h.optional.subsystem = get_string(opt, "subsystem", po);
#define X(f) h.optional.f = get_u64(opt, #f, po);
  EMBER_OPTIONAL_SCALARS_A(X)
#undef X
  h.optional.dll_characteristics = get_string_array(opt, "dll_characteristics", po);

  const auto& dos = require_object(j, "dos", "header");
  const std::string pd = "header.dos";
#define X(f) h.dos.f = get_u64(dos, #f, pd);
  EMBER_DOS_FIELDS(X)
#undef X
  return h;
}

ordered_json section_to_json(const SectionGroup& s) {
  ordered_json j = ordered_json::object();
  j["entry"] = s.entry;
  ordered_json list = ordered_json::array();
  for (const auto& e : s.sections) {
    ordered_json o = ordered_json::object();
    o["name"] = e.name;
    o["size"] = e.size;
    o["entropy"] = e.entropy;
    o["vsize"] = e.vsize;
    o["size_ratio"] = e.size_ratio;
    o["vsize_ratio"] = e.vsize_ratio;
    o["props"] = e.props;
    list.push_back(std::move(o));
  }
  j["sections"] = std::move(list);
  j["overlay"] = {{"size", s.overlay.size}, {"size_ratio", s.overlay.size_ratio}, {"entropy", s.overlay.entropy}};
  return j;
}

SectionGroup section_from_json(const ordered_json& j) {
  SectionGroup s;
  s.entry = get_string(j, "entry", "section");
  const auto& list = require_array(j, "sections", "section");
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string p = "section.sections[" + std::to_string(i) + "]";
    const auto& o = list[i];
    if (!o.is_object()) wrong_type(p, "object");
    SectionEntry e;
    e.name = get_string(o, "name", p);
    e.size = get_u64(o, "size", p);
    e.entropy = get_double(o, "entropy", p);
    e.vsize = get_u64(o, "vsize", p);
    e.size_ratio = get_double(o, "size_ratio", p);
    e.vsize_ratio = get_double(o, "vsize_ratio", p);
    e.props = get_string_array(o, "props", p);
    s.sections.push_back(std::move(e));
  }
  const auto& ov = require_object(j, "overlay", "section");
  s.overlay.size = get_u64(ov, "size", "section.overlay");
  s.overlay.size_ratio = get_double(ov, "size_ratio", "section.overlay");
  s.overlay.entropy = get_double(ov, "entropy", "section.overlay");
  return s;
}

ordered_json authenticode_to_json(const AuthenticodeSummary& a) {
  ordered_json j = ordered_json::object();
  j["num_certs"] = a.num_certs;
  j["self_signed"] = a.self_signed;
  j["empty_program_name"] = a.empty_program_name;
  j["no_countersigner"] = a.no_countersigner;
  j["parse_error"] = a.parse_error;
  j["chain_max_depth"] = a.chain_max_depth;
  j["latest_signing_time"] = a.latest_signing_time;
  j["signing_time_diff"] = a.signing_time_diff;
  return j;
}

AuthenticodeSummary authenticode_from_json(const ordered_json& j) {
  const std::string p = "authenticode";
  AuthenticodeSummary a;
  a.num_certs = get_u64(j, "num_certs", p);
  a.self_signed = get_u64(j, "self_signed", p);
  a.empty_program_name = get_u64(j, "empty_program_name", p);
  a.no_countersigner = get_u64(j, "no_countersigner", p);
  a.parse_error = get_u64(j, "parse_error", p);
  a.chain_max_depth = get_u64(j, "chain_max_depth", p);
  a.latest_signing_time = get_i64(j, "latest_signing_time", p);
  a.signing_time_diff = get_i64(j, "signing_time_diff", p);
  return a;
}

constexpr std::string_view kRawKeys[] = {"histogram", "byteentropy",     "strings",    "general",
                                         "header",    "section",         "imports",    "exports",
                                         "datadirectories", "richheader", "authenticode", "pefilewarnings"};

constexpr std::string_view kRecordKeys[] = {
    "md5",    "sha1",          "sha256", "tlsh",    "first_submission_date", "last_analysis_date", "detection_ratio",
    "label",  "file_type",     "family", "family_confidence", "behavior", "file_property",    "packer",
    "exploit", "group"};

bool in_list(std::span<const std::string_view> keys, std::string_view k) {
  return std::find(keys.begin(), keys.end(), k) != keys.end();
}

void append_raw(ordered_json& j, const RawFeatures& raw) {
  j["histogram"] = raw.histogram;
  j["byteentropy"] = raw.byteentropy;
  j["strings"] = strings_to_json(raw.strings);
  j["general"] = general_to_json(raw.general);
  if (raw.pe) {
    const auto& pe = *raw.pe;
    j["header"] = header_to_json(pe.header);
    j["section"] = section_to_json(pe.section);
    ordered_json imports = ordered_json::object();
    for (const auto& [lib, syms] : pe.imports) imports[lib] = syms;
    j["imports"] = std::move(imports);
    j["exports"] = pe.exports;
    ordered_json dirs = ordered_json::array();
    for (const auto& d : pe.datadirectories)
      dirs.push_back({{"name", d.name}, {"size", d.size}, {"virtual_address", d.virtual_address}});
    j["datadirectories"] = std::move(dirs);
    j["richheader"] = pe.richheader;
    j["authenticode"] = authenticode_to_json(pe.authenticode);
  } else {
    j["header"] = ordered_json::object();
    j["section"] = ordered_json::object();
    j["imports"] = ordered_json::object();
    j["exports"] = ordered_json::array();
    j["datadirectories"] = ordered_json::array();
    j["richheader"] = ordered_json::array();
    j["authenticode"] = ordered_json::object();
  }
  j["pefilewarnings"] = raw.pefilewarnings;
}

bool empty_container(const ordered_json& v) { return (v.is_object() || v.is_array()) && v.empty(); }

ordered_json parse_line(std::string_view line) {
  try {
    auto j = ordered_json::parse(line.begin(), line.end());
    if (!j.is_object()) throw RecordError(Kind::wrong_type, "", "top-level value is not an object");
    return j;
  } catch (const nlohmann::json::parse_error& e) {
    throw RecordError(Kind::syntax, "", std::string("malformed JSON: ") + e.what());
  }
}

void throw_first(const std::vector<Violation>& v) {
  if (!v.empty()) throw RecordError(Kind::invariant, v.front().field, v.front().field + ": " + v.front().message);
}

bool is_lower_hex(std::string_view s, std::size_t len) {
  if (s.size() != len) return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'); });
}

bool in_unit_range(double x, double hi) { return std::isfinite(x) && x >= 0.0 && x <= hi; }

bool parse_ratio(std::string_view s, std::uint64_t& d, std::uint64_t& t) {
  const auto slash = s.find('/');
  if (slash == std::string_view::npos || slash == 0 || slash + 1 >= s.size()) return false;
  auto digits = [](std::string_view part, std::uint64_t& out) {
    if (part.size() > 18) return false;
    out = 0;
    for (char c : part) {
      if (c < '0' || c > '9') return false;
      out = out * 10 + static_cast<std::uint64_t>(c - '0');
    }
    return true;
  };
  return digits(s.substr(0, slash), d) && digits(s.substr(slash + 1), t);
}

void check_tags(const std::vector<std::string>& tags, std::string_view category, std::vector<Violation>& out) {
  std::set<std::string_view> seen;
  for (const auto& t : tags) {
    if (t.empty() || ascii_lower(t) != t) {
      out.push_back({std::string(category), "tag '" + t + "' is empty or not lowercase"});
      return;
    }
    if (!seen.insert(t).second) {
      out.push_back({std::string(category), "duplicate tag '" + t + "'"});
      return;
    }
  }
}

}  // namespace

std::string_view file_type_name(FileType t) {
  switch (t) {
    case FileType::win32: return "Win32";
    case FileType::win64: return "Win64";
    case FileType::dotnet: return ".NET";
    case FileType::apk: return "APK";
    case FileType::elf: return "ELF";
    case FileType::pdf: return "PDF";
  }
  return "Win32";
}

std::string_view file_type_tag(FileType t) {
  switch (t) {
    case FileType::win32: return "win32";
    case FileType::win64: return "win64";
    case FileType::dotnet: return "dotnet";
    case FileType::apk: return "apk";
    case FileType::elf: return "elf";
    case FileType::pdf: return "pdf";
  }
  return "win32";
}

std::optional<FileType> parse_file_type(std::string_view s) {
  const std::string lower = ascii_lower(s);
  for (FileType t : kAllFileTypes) {
    if (lower == file_type_tag(t) || lower == ascii_lower(file_type_name(t))) return t;
  }
  return std::nullopt;
}

const std::vector<std::string>& FileMetadataRecord::tags(std::string_view category) const {
  if (category == "behavior") return behavior;
  if (category == "file_property") return file_property;
  if (category == "packer") return packer;
  if (category == "exploit") return exploit;
  if (category == "group") return group;
  throw std::invalid_argument("unknown tag category: " + std::string(category));
}

std::vector<std::string>& FileMetadataRecord::tags(std::string_view category) {
  return const_cast<std::vector<std::string>&>(std::as_const(*this).tags(category));
}

ordered_json raw_to_json(const RawFeatures& raw) {
  ordered_json j = ordered_json::object();
  append_raw(j, raw);
  return j;
}

RawFeatures raw_from_json(const ordered_json& j) {
  if (!j.is_object()) wrong_type("", "object");
  RawFeatures raw;
  raw.histogram = get_u64_array(j, "histogram", "");
  raw.byteentropy = get_u64_array(j, "byteentropy", "");
  raw.strings = strings_from_json(require_object(j, "strings", ""));
  raw.general = general_from_json(require_object(j, "general", ""));

  const auto& header = require(j, "header", "");
  if (!header.is_object()) wrong_type("header", "object");
  if (!header.empty()) {
    PeFeatures pe;
    pe.header = header_from_json(header);
    pe.section = section_from_json(require_object(j, "section", ""));
    const auto& imports = require_object(j, "imports", "");
    for (const auto& [lib, syms] : imports.items()) {
      const std::string p = "imports." + lib;
      if (!syms.is_array()) wrong_type(p, "array");
      std::vector<std::string> names;
      for (const auto& s : syms) names.push_back(as_string(s, p));
      pe.imports.emplace_back(lib, std::move(names));
    }
    pe.exports = get_string_array(j, "exports", "");
    const auto& dirs = require_array(j, "datadirectories", "");
    for (std::size_t i = 0; i < dirs.size(); ++i) {
      const std::string p = "datadirectories[" + std::to_string(i) + "]";
      if (!dirs[i].is_object()) wrong_type(p, "object");
      pe.datadirectories.push_back(
          {get_string(dirs[i], "name", p), get_u64(dirs[i], "size", p), get_u64(dirs[i], "virtual_address", p)});
    }
    pe.richheader = get_u64_array(j, "richheader", "");
    pe.authenticode = authenticode_from_json(require_object(j, "authenticode", ""));
    raw.pe = std::move(pe);
  } else {
    for (std::string_view k : {"section", "imports", "exports", "datadirectories", "richheader", "authenticode"}) {
      const auto& v = require(j, k, "");
      if (!empty_container(v)) {
        throw RecordError(Kind::invariant, std::string(k), std::string(k) + ": PE group present without header");
      }
    }
  }
  raw.pefilewarnings = get_string_array(j, "pefilewarnings", "");
  return raw;
}

ordered_json record_to_json(const FileMetadataRecord& r) {
  ordered_json j = ordered_json::object();
  j["md5"] = r.md5;
  j["sha1"] = r.sha1;
  j["sha256"] = r.sha256;
  j["tlsh"] = r.tlsh ? ordered_json(*r.tlsh) : ordered_json(nullptr);
  j["first_submission_date"] = r.first_submission_date;
  j["last_analysis_date"] = r.last_analysis_date;
  j["detection_ratio"] = r.detection_ratio;
  j["label"] = r.label;
  j["file_type"] = file_type_name(r.file_type);
  j["family"] = r.family ? ordered_json(*r.family) : ordered_json(nullptr);
  j["family_confidence"] = r.family_confidence ? ordered_json(*r.family_confidence) : ordered_json(nullptr);
  for (std::string_view c : kTagCategories) j[std::string(c)] = r.tags(c);
  append_raw(j, r.raw);
  for (const auto& [k, v] : r.extras.items()) j[k] = v;
  return j;
}

FileMetadataRecord record_from_json(const ordered_json& j) {
  if (!j.is_object()) wrong_type("", "object");
  FileMetadataRecord r;
  r.md5 = get_string(j, "md5", "");
  r.sha1 = get_string(j, "sha1", "");
  r.sha256 = get_string(j, "sha256", "");
  if (const auto& t = require(j, "tlsh", ""); !t.is_null()) r.tlsh = as_string(t, "tlsh");
  r.first_submission_date = get_i64(j, "first_submission_date", "");
  r.last_analysis_date = get_i64(j, "last_analysis_date", "");
  r.detection_ratio = get_string(j, "detection_ratio", "");
  r.label = get_i64(j, "label", "");
  const std::string ft = get_string(j, "file_type", "");
  const auto type = parse_file_type(ft);
  if (!type) throw RecordError(Kind::invariant, "file_type", "file_type: unknown value '" + ft + "'");
  r.file_type = *type;
  if (const auto it = j.find("family"); it != j.end() && !it->is_null()) r.family = as_string(*it, "family");
  if (const auto it = j.find("family_confidence"); it != j.end() && !it->is_null())
    r.family_confidence = as_double(*it, "family_confidence");
  for (std::string_view c : kTagCategories) r.tags(c) = get_string_array(j, c, "");
  r.raw = raw_from_json(j);
  for (const auto& [k, v] : j.items()) {
    if (!in_list(kRecordKeys, k) && !in_list(kRawKeys, k)) r.extras[k] = v;
  }
  return r;
}

std::string serialize_record(const FileMetadataRecord& record) {
  return record_to_json(record).dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace);
}

FileMetadataRecord parse_record(std::string_view line) {
  auto r = record_from_json(parse_line(line));
  throw_first(validate_record(r));
  return r;
}

std::string serialize_raw(const RawFeatures& raw, const ordered_json& extras) {
  ordered_json j = ordered_json::object();
  for (const auto& [k, v] : extras.items()) j[k] = v;
  append_raw(j, raw);
  return j.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace);
}

RawFeatures parse_raw(std::string_view line, ordered_json* extras) {
  const auto j = parse_line(line);
  auto raw = raw_from_json(j);
  throw_first(validate_raw(raw));
  if (extras) {
    *extras = ordered_json::object();
    for (const auto& [k, v] : j.items()) {
      if (!in_list(kRawKeys, k)) (*extras)[k] = v;
    }
  }
  return raw;
}

bool is_valid_tlsh_text(std::string_view s) {
  if (s.size() != 72 || s[0] != 'T' || s[1] != '1') return false;
  return std::all_of(s.begin() + 2, s.end(), [](char c) {
    return (c >= '0' && c <= '9') || (c >= 'A' && c <= 'F') || (c >= 'a' && c <= 'f');
  });
}

std::vector<Violation> validate_raw(const RawFeatures& raw, const PatternSet* patterns) {
  std::vector<Violation> v;
  if (raw.histogram.size() != 256) {
    v.push_back({"histogram", "expected 256 entries, got " + std::to_string(raw.histogram.size())});
  } else {
    std::uint64_t sum = 0;
    for (auto c : raw.histogram) sum += c;
    if (sum != raw.general.size) v.push_back({"histogram", "sum differs from general.size"});
  }
  if (raw.byteentropy.size() != 256)
    v.push_back({"byteentropy", "expected 256 entries, got " + std::to_string(raw.byteentropy.size())});

  const auto& s = raw.strings;
  if (s.printabledist.size() != 96) {
    v.push_back({"strings.printabledist", "expected 96 entries"});
  } else {
    std::uint64_t sum = 0;
    for (auto c : s.printabledist) sum += c;
    if (sum != s.printables) v.push_back({"strings.printabledist", "sum differs from printables"});
  }
  if (!std::isfinite(s.avlength) || s.avlength < 0.0) v.push_back({"strings.avlength", "must be finite and >= 0"});
  if (s.numstrings == 0 && (s.avlength != 0.0 || s.printables != 0))
    v.push_back({"strings.numstrings", "zero strings require avlength 0 and printables 0"});
  if (!in_unit_range(s.entropy, 8.0)) v.push_back({"strings.entropy", "must lie in [0, 8]"});
  if (patterns) {
    bool same = s.string_counts.size() == patterns->size();
    for (std::size_t i = 0; same && i < s.string_counts.size(); ++i)
      same = s.string_counts[i].first == patterns->patterns()[i].name;
    if (!same) v.push_back({"strings.string_counts", "key set differs from the pattern set"});
  } else {
    std::set<std::string_view> names;
    for (const auto& [name, n] : s.string_counts) {
      if (!names.insert(name).second) {
        v.push_back({"strings.string_counts", "duplicate pattern name '" + name + "'"});
        break;
      }
    }
  }

  const auto& g = raw.general;
  if (!in_unit_range(g.entropy, 8.0)) v.push_back({"general.entropy", "must lie in [0, 8]"});
  if (g.magic4.size() != 4 || std::any_of(g.magic4.begin(), g.magic4.end(), [](auto b) { return b > 255; }))
    v.push_back({"general.magic4", "expected four byte values"});
  if (g.pe && (g.pe->has_relocs > 1 || g.pe->has_dynamic_relocs > 1))
    v.push_back({"general.has_relocs", "flags must be 0 or 1"});

  if (raw.pe) {
    const auto& pe = *raw.pe;
    const auto& dos = pe.header.dos;
    bool dos_ok = dos.e_lfanew <= 0xFFFFFFFFu;
#define X(f) dos_ok = dos_ok && (#f == std::string_view("e_lfanew") || dos.f <= 0xFFFFu);
    EMBER_DOS_FIELDS(X)
#undef X
    if (!dos_ok) v.push_back({"header.dos", "field exceeds its on-disk width"});
    if (pe.header.optional.magic == 0x20b && pe.header.optional.base_of_data != 0)
      v.push_back({"header.optional.base_of_data", "must be 0 for 64-bit images"});
    for (std::size_t i = 0; i < pe.section.sections.size(); ++i) {
      const auto& e = pe.section.sections[i];
      if (!in_unit_range(e.entropy, 8.0) || !std::isfinite(e.size_ratio) || !std::isfinite(e.vsize_ratio) ||
          e.size_ratio < 0.0 || e.vsize_ratio < 0.0) {
        v.push_back({"section.sections[" + std::to_string(i) + "]", "entropy or ratio out of range"});
        break;
      }
    }
    const auto& ov = pe.section.overlay;
    if (!in_unit_range(ov.entropy, 8.0) || !std::isfinite(ov.size_ratio) || ov.size_ratio < 0.0)
      v.push_back({"section.overlay", "entropy or ratio out of range"});
    for (const auto& d : pe.datadirectories) {
      if (std::find(pe::kDataDirectoryNames.begin(), pe::kDataDirectoryNames.end(), d.name) ==
          pe::kDataDirectoryNames.end()) {
        v.push_back({"datadirectories", "non-canonical name '" + d.name + "'"});
        break;
      }
    }
    const auto& a = pe.authenticode;
    if (a.self_signed > 1 || a.empty_program_name > 1 || a.no_countersigner > 1 || a.parse_error > 1)
      v.push_back({"authenticode", "flags must be 0 or 1"});
  }
  return v;
}

std::vector<Violation> validate_record(const FileMetadataRecord& r, const PatternSet* patterns) {
  std::vector<Violation> v;
  if (!is_lower_hex(r.md5, 32)) v.push_back({"md5", "expected 32 lowercase hex characters"});
  if (!is_lower_hex(r.sha1, 40)) v.push_back({"sha1", "expected 40 lowercase hex characters"});
  if (!is_lower_hex(r.sha256, 64)) v.push_back({"sha256", "expected 64 lowercase hex characters"});
  if (r.tlsh && !is_valid_tlsh_text(*r.tlsh)) v.push_back({"tlsh", "not a T1 digest"});
  if (r.first_submission_date < 0) v.push_back({"first_submission_date", "must be >= 0"});
  if (r.last_analysis_date < 0) v.push_back({"last_analysis_date", "must be >= 0"});
  std::uint64_t d = 0, t = 0;
  if (!parse_ratio(r.detection_ratio, d, t) || d > t) v.push_back({"detection_ratio", "expected D/T with D <= T"});
  if (r.label != 0 && r.label != 1) v.push_back({"label", "must be 0 or 1"});
  if (r.family && (r.family->empty() || r.label != 1)) v.push_back({"family", "requires label 1 and a nonempty name"});
  if (r.family_confidence && !in_unit_range(*r.family_confidence, 1.0))
    v.push_back({"family_confidence", "must lie in [0, 1]"});
  for (std::string_view c : kTagCategories) check_tags(r.tags(c), c, v);
  if (!r.extras.is_object()) v.push_back({"extras", "must be an object"});
  auto raw = validate_raw(r.raw, patterns);
  v.insert(v.end(), raw.begin(), raw.end());
  return v;
}

}  // namespace ember
