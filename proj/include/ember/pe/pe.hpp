#pragma once

// PE/COFF parsing. parse_image() reads the fixed headers and section table
// into a ParsedImage; the extract_* functions derive feature groups from it.
// Nothing here throws on malformed input: problems become warning strings,
// and unreadable headers become a failure result.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ember/features.hpp"

namespace ember::pe {

inline constexpr std::size_t kMaxWarnings = 1000;

// Warning sink with a hard cap so hostile files cannot blow up the output.
class Warnings {
 public:
  void add(std::string_view prefix, std::string_view details = {});
  const std::vector<std::string>& list() const { return list_; }
  std::vector<std::string> take() { return std::move(list_); }

 private:
  std::vector<std::string> list_;
};

struct DirectorySlot {
  std::uint32_t virtual_address = 0;
  std::uint32_t size = 0;
};

struct SectionHeader {
  std::string name;  // escaped, see escape rules in extract_sections
  std::uint32_t virtual_size = 0;
  std::uint32_t virtual_address = 0;
  std::uint32_t size_of_raw_data = 0;
  std::uint32_t pointer_to_raw_data = 0;
  std::uint32_t characteristics = 0;
};

struct RawOptional {
  std::uint16_t magic = 0;
  std::uint8_t major_linker = 0, minor_linker = 0;
  std::uint32_t sizeof_code = 0, sizeof_initialized_data = 0, sizeof_uninitialized_data = 0;
  std::uint32_t address_of_entrypoint = 0, base_of_code = 0, base_of_data = 0;
  std::uint64_t image_base = 0;
  std::uint32_t section_alignment = 0, file_alignment = 0;
  std::uint16_t major_os = 0, minor_os = 0, major_image = 0, minor_image = 0;
  std::uint16_t major_subsystem = 0, minor_subsystem = 0;
  std::uint32_t win32_version = 0, sizeof_image = 0, sizeof_headers = 0, checksum = 0;
  std::uint16_t subsystem = 0, dll_characteristics = 0;
  std::uint64_t stack_reserve = 0, stack_commit = 0, heap_reserve = 0, heap_commit = 0;
  std::uint32_t loader_flags = 0, number_of_rvas_and_sizes = 0;
};

struct ParsedImage {
  std::span<const std::uint8_t> content;  // borrowed; must outlive the image
  DosHeader dos;
  std::uint32_t pe_offset = 0;
  std::uint16_t machine = 0;
  std::uint16_t number_of_sections = 0;
  std::uint32_t timestamp = 0;
  std::uint32_t pointer_to_symbol_table = 0;
  std::uint32_t number_of_symbols = 0;
  std::uint16_t sizeof_optional_header = 0;
  std::uint16_t characteristics = 0;
  RawOptional optional;
  std::array<DirectorySlot, 16> directories{};
  std::vector<SectionHeader> sections;
  std::size_t checksum_offset = 0;

  bool is_64() const { return optional.magic == 0x20b; }
  const DirectorySlot& directory(std::size_t index) const { return directories[index]; }

  // File offset backing `rva`, if any file byte is mapped there.
  std::optional<std::uint64_t> rva_to_offset(std::uint64_t rva) const;
  // Up to `want` file bytes mapped contiguously from `rva`; shorter (or
  // empty) when the mapping ends first.
  std::span<const std::uint8_t> read_rva(std::uint64_t rva, std::uint64_t want) const;
  // NUL-terminated string at `rva`; nullopt if unterminated within max_len
  // or unmapped.
  std::optional<std::string> string_at(std::uint64_t rva, std::size_t max_len = 512) const;
  std::optional<std::uint32_t> u32_at(std::uint64_t rva) const;
  std::optional<std::uint64_t> u64_at(std::uint64_t rva) const;
  // First section whose virtual span contains `rva`.
  const SectionHeader* section_containing(std::uint64_t rva) const;
};

struct ImageResult {
  std::optional<ParsedImage> image;
  std::string failure;  // set when image is absent
};

ImageResult parse_image(std::span<const std::uint8_t> content, Warnings& warnings);

HeaderGroup header_features(const ParsedImage& image);
SectionGroup extract_sections(const ParsedImage& image, std::uint64_t file_size, Warnings& warnings);
std::vector<DataDirectoryEntry> extract_data_directories(const ParsedImage& image);
std::vector<std::uint64_t> extract_rich_header(std::span<const std::uint8_t> content, Warnings& warnings);
AuthenticodeSummary extract_authenticode(const ParsedImage& image, Warnings& warnings);

struct ImportsExports {
  ImportMap imports;
  std::vector<std::string> exports;
};
ImportsExports extract_imports_exports(const ParsedImage& image, Warnings& warnings);

// vsize, relocation flags and symbol count for the general group.
PeGeneralFeatures general_pe_features(const ParsedImage& image, Warnings& warnings);

// Structural checks over headers, sections and the remaining directories.
void check_headers(const ParsedImage& image, Warnings& warnings);
void check_directories(const ParsedImage& image, Warnings& warnings);

// PE image checksum as computed by the loader tools.
std::uint32_t compute_checksum(std::span<const std::uint8_t> content, std::size_t checksum_offset);

struct PeParse {
  std::optional<PeFeatures> features;
  std::optional<PeGeneralFeatures> general;
  std::vector<std::string> warnings;
  std::string failure;  // nonempty when features are absent
  bool has_clr = false;

  bool ok() const { return features.has_value(); }
};

PeParse parse_pe(std::span<const std::uint8_t> content);

}  // namespace ember::pe
