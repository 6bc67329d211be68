#pragma once

// Hand-laid PE images for round-trip tests. Written against the published
// PE/COFF layout only; it shares no code with the parser under test.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "splitmix.hpp"

namespace ember::testing {

struct SectionSpec {
  std::string name;  // up to 8 bytes
  std::uint32_t virtual_size = 0;
  std::uint32_t characteristics = 0;
  std::vector<std::uint8_t> data;  // raw bytes, padded to FileAlignment
};

struct ImportSpec {
  std::string dll;
  std::vector<std::string> names;
  std::vector<std::uint16_t> ordinals;
};

struct RichEntry {
  std::uint32_t compid = 0;
  std::uint32_t count = 0;
};

struct PeSpec {
  bool pe64 = true;
  // DOS header fields after e_magic; e_lfanew is computed.
  std::array<std::uint16_t, 13> dos_words{0x90, 3, 0, 4, 0, 0xFFFF, 0, 0xB8, 0, 0, 0, 0x40, 0};
  std::uint16_t e_oemid = 0, e_oeminfo = 0;

  std::uint16_t machine = 0x8664;
  std::uint32_t timestamp = 0;
  std::uint32_t pointer_to_symbol_table = 0;
  std::uint32_t number_of_symbols = 0;
  std::uint16_t characteristics = 0x0022;

  std::uint8_t major_linker = 14, minor_linker = 0;
  std::uint32_t entry_offset = 0;  // offset into the first section
  std::uint64_t image_base = 0x140000000ull;
  std::uint32_t section_alignment = 0x1000;
  std::uint32_t file_alignment = 0x200;
  std::uint16_t major_os = 6, minor_os = 0, major_image = 0, minor_image = 0;
  std::uint16_t major_subsystem = 6, minor_subsystem = 0;
  std::uint16_t subsystem = 3;
  std::uint16_t dll_characteristics = 0x8160;
  std::uint64_t stack_reserve = 0x100000, stack_commit = 0x1000;
  std::uint64_t heap_reserve = 0x100000, heap_commit = 0x1000;
  std::uint32_t base_of_data = 0;  // PE32 only
  std::uint32_t number_of_rvas_and_sizes = 16;
  std::uint32_t sizeof_code = 0, sizeof_initialized_data = 0, sizeof_uninitialized_data = 0;
  bool write_checksum = false;

  std::vector<SectionSpec> sections;
  std::vector<ImportSpec> imports;  // emitted into an extra ".idata" section
  std::vector<std::string> exports;  // emitted into an extra ".edata" section
  std::vector<RichEntry> rich;
  bool corrupt_rich_key = false;
  // Extra directory slots (index, rva, size) written verbatim.
  std::vector<std::array<std::uint32_t, 3>> extra_directories;
  std::vector<std::uint8_t> overlay;
  std::vector<std::uint8_t> certificate_table;  // appended after sections; SECURITY points here
};

struct PeLayout {
  std::uint32_t e_lfanew = 0;
  std::uint32_t sizeof_headers = 0;
  std::uint32_t sizeof_image = 0;
  std::uint32_t address_of_entrypoint = 0;
  std::uint32_t base_of_code = 0;
  std::uint32_t checksum = 0;
  std::uint32_t sections_end = 0;  // end of the last section's raw data
  std::uint32_t certificate_offset = 0;
  struct Placed {
    std::string name;
    std::uint32_t va, vsize, raw_ptr, raw_size, characteristics;
  };
  std::vector<Placed> sections;
  std::array<std::array<std::uint32_t, 2>, 16> directories{};
};

std::vector<std::uint8_t> build_pe(const PeSpec& spec, PeLayout* layout = nullptr);

// Deterministic random but well-formed spec.
PeSpec random_spec(SplitMix64& rng);

std::uint32_t reference_checksum(const std::vector<std::uint8_t>& image, std::size_t checksum_offset);

}  // namespace ember::testing
