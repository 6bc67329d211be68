#include <algorithm>
#include <cstdio>

#include "bytes.hpp"
#include "ember/agnostic.hpp"
#include "ember/pe/constants.hpp"
#include "ember/pe/pe.hpp"
#include "messages.hpp"

namespace ember::pe {
namespace {

constexpr std::size_t kMaxSections = 2048;
constexpr std::size_t kSectionWarnThreshold = 96;

std::string hex(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t extent(const SectionHeader& s) {
  return std::max<std::uint64_t>(s.virtual_size, s.size_of_raw_data);
}

bool is_pow2(std::uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

DosHeader read_dos(const ByteView& v) {
  DosHeader d;
  d.e_magic = v.u16(0);
  d.e_cblp = v.u16(2);
  d.e_cp = v.u16(4);
  d.e_crlc = v.u16(6);
  d.e_cparhdr = v.u16(8);
  d.e_minalloc = v.u16(10);
  d.e_maxalloc = v.u16(12);
  d.e_ss = v.u16(14);
  d.e_sp = v.u16(16);
  d.e_csum = v.u16(18);
  d.e_ip = v.u16(20);
  d.e_cs = v.u16(22);
  d.e_lfarlc = v.u16(24);
  d.e_ovno = v.u16(26);
  d.e_oemid = v.u16(36);
  d.e_oeminfo = v.u16(38);
  d.e_lfanew = v.u32(60);
  return d;
}

RawOptional read_optional(const ByteView& v, std::size_t o, bool is64) {
  RawOptional r;
  r.magic = v.u16(o);
  r.major_linker = v.u8(o + 2);
  r.minor_linker = v.u8(o + 3);
  r.sizeof_code = v.u32(o + 4);
  r.sizeof_initialized_data = v.u32(o + 8);
  r.sizeof_uninitialized_data = v.u32(o + 12);
  r.address_of_entrypoint = v.u32(o + 16);
  r.base_of_code = v.u32(o + 20);
  std::size_t p = o + 24;
  if (is64) {
    r.image_base = v.u64(p);
    p += 8;
  } else {
    r.base_of_data = v.u32(p);
    r.image_base = v.u32(p + 4);
    p += 8;
  }
  r.section_alignment = v.u32(p);
  r.file_alignment = v.u32(p + 4);
  r.major_os = v.u16(p + 8);
  r.minor_os = v.u16(p + 10);
  r.major_image = v.u16(p + 12);
  r.minor_image = v.u16(p + 14);
  r.major_subsystem = v.u16(p + 16);
  r.minor_subsystem = v.u16(p + 18);
  r.win32_version = v.u32(p + 20);
  r.sizeof_image = v.u32(p + 24);
  r.sizeof_headers = v.u32(p + 28);
  r.checksum = v.u32(p + 32);
  r.subsystem = v.u16(p + 36);
  r.dll_characteristics = v.u16(p + 38);
  p += 40;
  const std::size_t w = is64 ? 8 : 4;
  auto word = [&](std::size_t at) -> std::uint64_t { return is64 ? v.u64(at) : v.u32(at); };
  r.stack_reserve = word(p);
  r.stack_commit = word(p + w);
  r.heap_reserve = word(p + 2 * w);
  r.heap_commit = word(p + 3 * w);
  p += 4 * w;
  r.loader_flags = v.u32(p);
  r.number_of_rvas_and_sizes = v.u32(p + 4);
  return r;
}

}  // namespace

void Warnings::add(std::string_view prefix, std::string_view details) {
  if (list_.size() >= kMaxWarnings) return;
  std::string w(prefix);
  if (!details.empty()) {
    w.push_back(' ');
    w.append(details);
  }
  list_.push_back(std::move(w));
}

const SectionHeader* ParsedImage::section_containing(std::uint64_t rva) const {
  for (const auto& s : sections) {
    if (rva >= s.virtual_address && rva < s.virtual_address + extent(s)) return &s;
  }
  return nullptr;
}

namespace {

// [offset, limit) of the file bytes backing rva.
std::optional<std::pair<std::uint64_t, std::uint64_t>> map_rva(const ParsedImage& img, std::uint64_t rva) {
  const std::uint64_t file_size = img.content.size();
  if (const SectionHeader* s = img.section_containing(rva)) {
    const std::uint64_t delta = rva - s->virtual_address;
    if (delta >= s->size_of_raw_data) return std::nullopt;
    const std::uint64_t off = static_cast<std::uint64_t>(s->pointer_to_raw_data) + delta;
    const std::uint64_t limit =
        std::min<std::uint64_t>(static_cast<std::uint64_t>(s->pointer_to_raw_data) + s->size_of_raw_data, file_size);
    if (off >= limit) return std::nullopt;
    return std::make_pair(off, limit);
  }
  std::uint64_t header_limit = file_size;
  for (const auto& s : img.sections) header_limit = std::min<std::uint64_t>(header_limit, s.virtual_address);
  if (rva < header_limit) return std::make_pair(rva, header_limit);
  return std::nullopt;
}

}  // namespace

std::optional<std::uint64_t> ParsedImage::rva_to_offset(std::uint64_t rva) const {
  auto m = map_rva(*this, rva);
  if (!m) return std::nullopt;
  return m->first;
}

std::span<const std::uint8_t> ParsedImage::read_rva(std::uint64_t rva, std::uint64_t want) const {
  auto m = map_rva(*this, rva);
  if (!m) return {};
  const std::uint64_t n = std::min(want, m->second - m->first);
  return content.subspan(static_cast<std::size_t>(m->first), static_cast<std::size_t>(n));
}

std::optional<std::string> ParsedImage::string_at(std::uint64_t rva, std::size_t max_len) const {
  const auto bytes = read_rva(rva, max_len + 1);
  const auto nul = std::find(bytes.begin(), bytes.end(), std::uint8_t{0});
  if (nul == bytes.end()) return std::nullopt;
  return escape_name(bytes.first(static_cast<std::size_t>(nul - bytes.begin())));
}

std::optional<std::uint32_t> ParsedImage::u32_at(std::uint64_t rva) const {
  const auto b = read_rva(rva, 4);
  if (b.size() < 4) return std::nullopt;
  return ByteView(b).u32(0);
}

std::optional<std::uint64_t> ParsedImage::u64_at(std::uint64_t rva) const {
  const auto b = read_rva(rva, 8);
  if (b.size() < 8) return std::nullopt;
  return ByteView(b).u64(0);
}

ImageResult parse_image(std::span<const std::uint8_t> content, Warnings& warnings) {
  ImageResult result;
  auto fail = [&](std::string_view prefix, std::string_view details = {}) {
    warnings.add(prefix, details);
    result.failure = warnings.list().empty() ? std::string(prefix) : warnings.list().back();
    return result;
  };

  const ByteView v(content);
  if (!v.has(0, 64)) return fail(msg::dos_header_truncated);
  if (v.u16(0) != 0x5A4D) return fail(msg::dos_magic_missing);

  ParsedImage img;
  img.content = content;
  img.dos = read_dos(v);
  const std::uint64_t lfanew = img.dos.e_lfanew;
  if (lfanew > content.size() || lfanew < 4) return fail(msg::lfanew_invalid);
  if (!v.has(lfanew, 4)) return fail(msg::nt_signature_invalid);

  const std::uint32_t sig = v.u32(static_cast<std::size_t>(lfanew));
  if (sig != 0x00004550) {
    switch (sig & 0xFFFF) {
      case 0x454E: return fail(msg::nt_signature_ne);
      case 0x454C: return fail(msg::nt_signature_le);
      case 0x584C: return fail(msg::nt_signature_lx);
      case 0x5A56: return fail(msg::nt_signature_te);
      default: return fail(msg::nt_signature_invalid);
    }
  }
  img.pe_offset = static_cast<std::uint32_t>(lfanew);

  const std::size_t coff = static_cast<std::size_t>(lfanew) + 4;
  if (!v.has(coff, 20)) return fail(msg::file_header_truncated);
  img.machine = v.u16(coff);
  img.number_of_sections = v.u16(coff + 2);
  img.timestamp = v.u32(coff + 4);
  img.pointer_to_symbol_table = v.u32(coff + 8);
  img.number_of_symbols = v.u32(coff + 12);
  img.sizeof_optional_header = v.u16(coff + 16);
  img.characteristics = v.u16(coff + 18);

  const std::size_t opt = coff + 20;
  if (!v.has(opt, 2)) return fail(msg::optional_header_truncated);
  const std::uint16_t magic = v.u16(opt);
  if (magic != 0x10b && magic != 0x20b) return fail(msg::optional_header_magic, hex(magic));
  const bool is64 = magic == 0x20b;
  const std::size_t fixed = is64 ? 112 : 96;
  if (!v.has(opt, fixed)) return fail(msg::optional_header_truncated);
  img.optional = read_optional(v, opt, is64);
  img.checksum_offset = opt + 64;

  if (img.sizeof_optional_header < fixed)
    warnings.add(msg::sizeof_optional_header_small, std::to_string(img.sizeof_optional_header));
  if (opt + img.sizeof_optional_header > content.size()) warnings.add(msg::sizeof_optional_header_eof);

  const std::uint32_t nrvas = img.optional.number_of_rvas_and_sizes;
  if (nrvas > 16) warnings.add(msg::rvas_and_sizes_suspicious, std::to_string(nrvas));
  const std::size_t ndirs = std::min<std::uint32_t>(nrvas, 16);
  for (std::size_t i = 0; i < ndirs; ++i) {
    const std::size_t at = opt + fixed + 8 * i;
    if (!v.has(at, 8)) {
      warnings.add(msg::data_directory_truncated);
      break;
    }
    img.directories[i].virtual_address = v.u32(at);
    img.directories[i].size = v.u32(at + 4);
  }

  const std::size_t declared = img.number_of_sections;
  if (declared == 0) warnings.add(msg::no_sections);
  if (declared > kSectionWarnThreshold) warnings.add(msg::too_many_sections, std::to_string(declared));
  const std::size_t table = opt + img.sizeof_optional_header;
  const std::size_t to_read = std::min(declared, kMaxSections);
  for (std::size_t i = 0; i < to_read; ++i) {
    const std::size_t at = table + 40 * i;
    if (!v.has(at, 40)) {
      warnings.add(msg::section_table_truncated, "after " + std::to_string(i) + " entries");
      break;
    }
    SectionHeader s;
    auto raw_name = content.subspan(at, 8);
    const auto nul = std::find(raw_name.begin(), raw_name.end(), std::uint8_t{0});
    bool odd = false;
    s.name = escape_name(raw_name.first(static_cast<std::size_t>(nul - raw_name.begin())), &odd);
    if (odd) warnings.add(msg::section_name_nonprintable, s.name);
    s.virtual_size = v.u32(at + 8);
    s.virtual_address = v.u32(at + 12);
    s.size_of_raw_data = v.u32(at + 16);
    s.pointer_to_raw_data = v.u32(at + 20);
    s.characteristics = v.u32(at + 36);
    img.sections.push_back(std::move(s));
  }
  if (img.sections.size() != declared && img.sections.size() == to_read)
    warnings.add(msg::section_count_mismatch, std::to_string(img.sections.size()) + " of " + std::to_string(declared));

  result.image = std::move(img);
  return result;
}

HeaderGroup header_features(const ParsedImage& img) {
  HeaderGroup h;
  h.dos = img.dos;
  h.coff.timestamp = img.timestamp;
  h.coff.machine = std::string(lookup_name(kMachines, img.machine, "IMAGE_FILE_MACHINE_UNKNOWN"));
  h.coff.number_of_sections = img.number_of_sections;
  h.coff.number_of_symbols = img.number_of_symbols;
  h.coff.sizeof_optional_header = img.sizeof_optional_header;
  h.coff.pointer_to_symbol_table = img.pointer_to_symbol_table;
  h.coff.characteristics = flag_names(kCoffCharacteristics, img.characteristics);

  const RawOptional& r = img.optional;
  OptionalHeader& o = h.optional;
  o.magic = r.magic;
  o.subsystem = std::string(lookup_name(kSubsystems, r.subsystem, "IMAGE_SUBSYSTEM_UNKNOWN"));
  o.major_image_version = r.major_image;
  o.minor_image_version = r.minor_image;
  o.major_linker_version = r.major_linker;
  o.minor_linker_version = r.minor_linker;
  o.major_operating_system_version = r.major_os;
  o.minor_operating_system_version = r.minor_os;
  o.major_subsystem_version = r.major_subsystem;
  o.minor_subsystem_version = r.minor_subsystem;
  o.sizeof_code = r.sizeof_code;
  o.sizeof_headers = r.sizeof_headers;
  o.sizeof_image = r.sizeof_image;
  o.sizeof_initialized_data = r.sizeof_initialized_data;
  o.sizeof_uninitialized_data = r.sizeof_uninitialized_data;
  o.sizeof_stack_reserve = r.stack_reserve;
  o.sizeof_stack_commit = r.stack_commit;
  o.sizeof_heap_reserve = r.heap_reserve;
  o.sizeof_heap_commit = r.heap_commit;
  o.address_of_entrypoint = r.address_of_entrypoint;
  o.base_of_code = r.base_of_code;
  o.base_of_data = img.is_64() ? 0 : r.base_of_data;
  o.image_base = r.image_base;
  o.section_alignment = r.section_alignment;
  o.checksum = r.checksum;
  o.number_of_rvas_and_sizes = r.number_of_rvas_and_sizes;
  o.dll_characteristics = flag_names(kDllCharacteristics, r.dll_characteristics);
  return h;
}

SectionGroup extract_sections(const ParsedImage& img, std::uint64_t file_size, Warnings& warnings) {
  SectionGroup g;
  const ByteView file(img.content);
  if (const SectionHeader* s = img.section_containing(img.optional.address_of_entrypoint)) g.entry = s->name;

  std::uint64_t data_end = 0;
  bool any_raw = false;
  for (const auto& s : img.sections) {
    SectionEntry e;
    e.name = s.name;
    e.size = s.size_of_raw_data;
    e.vsize = s.virtual_size;
    const auto bytes = file.slice(s.pointer_to_raw_data, s.size_of_raw_data);
    e.entropy = shannon_entropy(byte_histogram(bytes));
    e.size_ratio = file_size == 0 ? 0.0 : static_cast<double>(e.size) / static_cast<double>(file_size);
    e.vsize_ratio = e.vsize == 0 ? 0.0 : static_cast<double>(e.size) / static_cast<double>(e.vsize);
    e.props = flag_names(kSectionFlags, s.characteristics);
    g.sections.push_back(std::move(e));

    if (s.size_of_raw_data > 0) {
      any_raw = true;
      const std::uint64_t end = static_cast<std::uint64_t>(s.pointer_to_raw_data) + s.size_of_raw_data;
      data_end = std::max(data_end, end);
    }
  }

  if (any_raw) {
    if (data_end > file_size) {
      warnings.add(msg::overlay_truncated, "by " + std::to_string(data_end - file_size) + " bytes");
    } else if (data_end < file_size) {
      const auto tail = file.slice(data_end, file_size - data_end);
      g.overlay.size = tail.size();
      g.overlay.size_ratio = static_cast<double>(tail.size()) / static_cast<double>(file_size);
      g.overlay.entropy = shannon_entropy(byte_histogram(tail));
    }
  }
  return g;
}

std::vector<DataDirectoryEntry> extract_data_directories(const ParsedImage& img) {
  std::vector<DataDirectoryEntry> out;
  for (std::size_t i = 0; i < img.directories.size(); ++i) {
    const auto& d = img.directories[i];
    if (d.virtual_address == 0 && d.size == 0) continue;
    out.push_back({std::string(kDataDirectoryNames[i]), d.size, d.virtual_address});
  }
  return out;
}

std::uint32_t compute_checksum(std::span<const std::uint8_t> content, std::size_t checksum_offset) {
  std::uint64_t sum = 0;
  const std::size_t n = content.size();
  for (std::size_t i = 0; i < n; i += 4) {
    if (i / 4 == checksum_offset / 4) continue;
    std::uint32_t dword = 0;
    for (std::size_t k = 0; k < 4 && i + k < n; ++k) dword |= static_cast<std::uint32_t>(content[i + k]) << (8 * k);
    sum += dword;
    if (sum > 0xFFFFFFFFull) sum = (sum & 0xFFFFFFFFull) + (sum >> 32);
  }
  sum = (sum & 0xFFFF) + (sum >> 16);
  sum = sum + (sum >> 16);
  sum &= 0xFFFF;
  return static_cast<std::uint32_t>(sum + n);
}

void check_headers(const ParsedImage& img, Warnings& w) {
  const RawOptional& o = img.optional;
  const std::uint64_t file_size = img.content.size();

  bool known_machine = false;
  for (const auto& m : kMachines) known_machine |= m.value == img.machine;
  if (!known_machine) w.add(msg::machine_unknown, hex(img.machine));

  if (!is_pow2(o.file_alignment)) {
    w.add(msg::file_alignment_invalid, hex(o.file_alignment));
  } else if ((o.file_alignment < 0x200 || o.file_alignment > 0x10000) && o.file_alignment != o.section_alignment) {
    w.add(msg::file_alignment_range, hex(o.file_alignment));
  }
  if (!is_pow2(o.section_alignment)) w.add(msg::section_alignment_invalid, hex(o.section_alignment));
  if (o.section_alignment < o.file_alignment) w.add(msg::section_alignment_small);

  if (o.image_base == 0) {
    w.add(msg::image_base_zero);
  } else if (o.image_base % 0x10000 != 0) {
    w.add(msg::image_base_unaligned, hex(o.image_base));
  }

  const bool is_dll = (img.characteristics & 0x2000) != 0;
  const std::uint32_t ep = o.address_of_entrypoint;
  if (ep == 0) {
    if (!is_dll) w.add(msg::entrypoint_zero);
  } else if (const SectionHeader* s = img.section_containing(ep)) {
    if ((s->characteristics & 0x20000020) == 0) w.add(msg::entrypoint_not_executable, s->name);
  } else if (ep < o.sizeof_headers) {
    w.add(msg::entrypoint_in_header, hex(ep));
  } else {
    w.add(msg::entrypoint_outside, hex(ep));
  }

  if (is_pow2(o.file_alignment) && o.sizeof_headers % o.file_alignment != 0) w.add(msg::sizeof_headers_unaligned);
  if (o.sizeof_headers > file_size) w.add(msg::sizeof_headers_eof);
  if (is_pow2(o.section_alignment) && o.sizeof_image % o.section_alignment != 0) w.add(msg::sizeof_image_unaligned);

  std::uint64_t image_extent = 0;
  for (const auto& s : img.sections) {
    std::uint64_t vs = s.virtual_size;
    if (is_pow2(o.section_alignment)) vs = (vs + o.section_alignment - 1) & ~(std::uint64_t{o.section_alignment} - 1);
    image_extent = std::max(image_extent, static_cast<std::uint64_t>(s.virtual_address) + vs);
  }
  if (o.sizeof_image < image_extent) w.add(msg::sizeof_image_small, hex(o.sizeof_image) + " < " + hex(image_extent));

  if (o.checksum != 0) {
    const std::uint32_t computed = compute_checksum(img.content, img.checksum_offset);
    if (computed != o.checksum) w.add(msg::checksum_mismatch, hex(o.checksum) + " != " + hex(computed));
  }

  for (const auto& s : img.sections) {
    const std::string tag = "(" + s.name + ")";
    if (s.size_of_raw_data > 0) {
      if (s.pointer_to_raw_data > file_size) {
        w.add(msg::section_raw_pointer_eof, tag);
      } else if (static_cast<std::uint64_t>(s.pointer_to_raw_data) + s.size_of_raw_data > file_size) {
        w.add(msg::section_raw_size_eof, tag);
      }
      if (is_pow2(o.file_alignment) && s.pointer_to_raw_data % o.file_alignment != 0)
        w.add(msg::section_raw_unaligned, tag);
    }
    if (s.virtual_size > 0x10000000u) w.add(msg::section_vsize_large, tag);
    if (is_pow2(o.section_alignment) && s.virtual_address % o.section_alignment != 0)
      w.add(msg::section_va_unaligned, tag);
    if (s.size_of_raw_data == 0 && s.virtual_size == 0) w.add(msg::section_empty, tag);
    if ((s.characteristics & 0x80000000u) && (s.characteristics & 0x20000000u)) w.add(msg::section_write_execute, tag);
  }

  std::vector<const SectionHeader*> order;
  for (const auto& s : img.sections) order.push_back(&s);
  std::sort(order.begin(), order.end(),
            [](const SectionHeader* a, const SectionHeader* b) { return a->virtual_address < b->virtual_address; });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (order[i]->virtual_address < static_cast<std::uint64_t>(order[i - 1]->virtual_address) + order[i - 1]->virtual_size) {
      w.add(msg::section_virtual_overlap, order[i - 1]->name + " and " + order[i]->name);
      break;
    }
  }
  order.erase(std::remove_if(order.begin(), order.end(), [](const SectionHeader* s) { return s->size_of_raw_data == 0; }),
              order.end());
  std::sort(order.begin(), order.end(),
            [](const SectionHeader* a, const SectionHeader* b) { return a->pointer_to_raw_data < b->pointer_to_raw_data; });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (order[i]->pointer_to_raw_data <
        static_cast<std::uint64_t>(order[i - 1]->pointer_to_raw_data) + order[i - 1]->size_of_raw_data) {
      w.add(msg::section_raw_overlap, order[i - 1]->name + " and " + order[i]->name);
      break;
    }
  }
}

}  // namespace ember::pe
