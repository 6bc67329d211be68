#pragma once

// Raw feature document (feature version 3) and the per-file metadata record
// that embeds it. Plain aggregates; JSON mapping lives in record.hpp.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace ember {

inline constexpr std::string_view kFeatureVersion = "v3";

enum class FileType { win32, win64, dotnet, apk, elf, pdf };

inline constexpr FileType kAllFileTypes[] = {FileType::win32, FileType::win64, FileType::dotnet,
                                             FileType::apk,   FileType::elf,   FileType::pdf};

// Display names as they appear in metadata records ("Win32", ".NET", ...).
std::string_view file_type_name(FileType t);
// Lowercase token used in file names ("win32", "dotnet", ...).
std::string_view file_type_tag(FileType t);
// Accepts either form, case-insensitive. Returns nullopt when unknown.
std::optional<FileType> parse_file_type(std::string_view s);
inline bool is_pe_type(FileType t) {
  return t == FileType::win32 || t == FileType::win64 || t == FileType::dotnet;
}

struct StringFeatures {
  std::uint64_t numstrings = 0;
  double avlength = 0.0;
  std::vector<std::uint64_t> printabledist = std::vector<std::uint64_t>(96, 0);
  std::uint64_t printables = 0;
  double entropy = 0.0;
  // Pattern name -> count, in pattern-set order.
  std::vector<std::pair<std::string, std::uint64_t>> string_counts;

  bool operator==(const StringFeatures&) const = default;
};

// Populated only for files that parse as PE.
struct PeGeneralFeatures {
  std::uint64_t vsize = 0;
  std::uint64_t has_relocs = 0;
  std::uint64_t has_dynamic_relocs = 0;
  std::uint64_t symbols = 0;

  bool operator==(const PeGeneralFeatures&) const = default;
};

struct GeneralFeatures {
  std::uint64_t size = 0;
  double entropy = 0.0;
  std::vector<std::uint64_t> magic4 = std::vector<std::uint64_t>(4, 0);
  std::optional<PeGeneralFeatures> pe;

  bool operator==(const GeneralFeatures&) const = default;
};

struct DosHeader {
  std::uint64_t e_magic = 0, e_cblp = 0, e_cp = 0, e_crlc = 0, e_cparhdr = 0, e_minalloc = 0,
                e_maxalloc = 0, e_ss = 0, e_sp = 0, e_csum = 0, e_ip = 0, e_cs = 0, e_lfarlc = 0,
                e_ovno = 0, e_oemid = 0, e_oeminfo = 0, e_lfanew = 0;

  bool operator==(const DosHeader&) const = default;
};

struct CoffHeader {
  std::uint64_t timestamp = 0;
  std::string machine;
  std::uint64_t number_of_sections = 0;
  std::uint64_t number_of_symbols = 0;
  std::uint64_t sizeof_optional_header = 0;
  std::uint64_t pointer_to_symbol_table = 0;
  std::vector<std::string> characteristics;

  bool operator==(const CoffHeader&) const = default;
};

struct OptionalHeader {
  std::uint64_t magic = 0;
  std::string subsystem;
  std::uint64_t major_image_version = 0, minor_image_version = 0;
  std::uint64_t major_linker_version = 0, minor_linker_version = 0;
  std::uint64_t major_operating_system_version = 0, minor_operating_system_version = 0;
  std::uint64_t major_subsystem_version = 0, minor_subsystem_version = 0;
  std::uint64_t sizeof_code = 0, sizeof_headers = 0, sizeof_image = 0;
  std::uint64_t sizeof_initialized_data = 0, sizeof_uninitialized_data = 0;
  std::uint64_t sizeof_stack_reserve = 0, sizeof_stack_commit = 0;
  std::uint64_t sizeof_heap_reserve = 0, sizeof_heap_commit = 0;
  std::uint64_t address_of_entrypoint = 0, base_of_code = 0, base_of_data = 0;
  std::uint64_t image_base = 0, section_alignment = 0, checksum = 0;
  std::uint64_t number_of_rvas_and_sizes = 0;
  std::vector<std::string> dll_characteristics;

  bool operator==(const OptionalHeader&) const = default;
};

struct HeaderGroup {
  CoffHeader coff;
  OptionalHeader optional;
  DosHeader dos;

  bool operator==(const HeaderGroup&) const = default;
};

struct SectionEntry {
  std::string name;
  std::uint64_t size = 0;
  double entropy = 0.0;
  std::uint64_t vsize = 0;
  double size_ratio = 0.0;
  double vsize_ratio = 0.0;
  std::vector<std::string> props;

  bool operator==(const SectionEntry&) const = default;
};

struct OverlayInfo {
  std::uint64_t size = 0;
  double size_ratio = 0.0;
  double entropy = 0.0;

  bool operator==(const OverlayInfo&) const = default;
};

struct SectionGroup {
  std::string entry;
  std::vector<SectionEntry> sections;
  OverlayInfo overlay;

  bool operator==(const SectionGroup&) const = default;
};

struct DataDirectoryEntry {
  std::string name;
  std::uint64_t size = 0;
  std::uint64_t virtual_address = 0;

  bool operator==(const DataDirectoryEntry&) const = default;
};

struct AuthenticodeSummary {
  std::uint64_t num_certs = 0;
  std::uint64_t self_signed = 0;
  std::uint64_t empty_program_name = 0;
  std::uint64_t no_countersigner = 0;
  std::uint64_t parse_error = 0;
  std::uint64_t chain_max_depth = 0;
  std::int64_t latest_signing_time = 0;
  std::int64_t signing_time_diff = 0;

  bool operator==(const AuthenticodeSummary&) const = default;
};

using ImportMap = std::vector<std::pair<std::string, std::vector<std::string>>>;

struct PeFeatures {
  HeaderGroup header;
  SectionGroup section;
  ImportMap imports;  // library -> symbols, first-seen library order
  std::vector<std::string> exports;
  std::vector<DataDirectoryEntry> datadirectories;
  std::vector<std::uint64_t> richheader;  // flattened (compid, count) pairs
  AuthenticodeSummary authenticode;

  bool operator==(const PeFeatures&) const = default;
};

struct RawFeatures {
  std::vector<std::uint64_t> histogram = std::vector<std::uint64_t>(256, 0);
  std::vector<std::uint64_t> byteentropy = std::vector<std::uint64_t>(256, 0);
  StringFeatures strings;
  GeneralFeatures general;
  std::optional<PeFeatures> pe;  // absent for non-PE and unparseable PE input
  std::vector<std::string> pefilewarnings;

  bool operator==(const RawFeatures&) const = default;
};

inline constexpr std::string_view kTagCategories[] = {"behavior", "file_property", "packer", "exploit", "group"};

struct FileMetadataRecord {
  std::string md5;
  std::string sha1;
  std::string sha256;
  std::optional<std::string> tlsh;
  std::int64_t first_submission_date = 0;
  std::int64_t last_analysis_date = 0;
  std::string detection_ratio = "0/0";
  std::int64_t label = 0;
  FileType file_type = FileType::win32;
  std::optional<std::string> family;
  std::optional<double> family_confidence;
  std::vector<std::string> behavior;
  std::vector<std::string> file_property;
  std::vector<std::string> packer;
  std::vector<std::string> exploit;
  std::vector<std::string> group;
  RawFeatures raw;
  // Keys not in the schema; preserved in original order and re-emitted last.
  nlohmann::ordered_json extras = nlohmann::ordered_json::object();

  const std::vector<std::string>& tags(std::string_view category) const;
  std::vector<std::string>& tags(std::string_view category);

  bool operator==(const FileMetadataRecord&) const = default;
};

}  // namespace ember
