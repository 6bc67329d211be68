#include <algorithm>
#include <cstdio>
#include <set>

#include "bytes.hpp"
#include "ember/pe/constants.hpp"
#include "ember/pe/pe.hpp"
#include "messages.hpp"

namespace ember::pe {
namespace {

constexpr std::size_t kMaxRelocBlocks = 65536;
constexpr std::size_t kMaxResourceEntries = 4096;
constexpr int kMaxResourceDepth = 3;
constexpr std::size_t kMaxTlsCallbacks = 256;

std::string hex(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(v));
  return buf;
}

struct LoadConfigFields {
  std::uint64_t dvrt = 0;  // DynamicValueRelocTable VA
  std::uint32_t dvrt_offset = 0;
  std::uint16_t dvrt_section = 0;
};

// The Size field governs which trailing members exist.
std::optional<LoadConfigFields> read_load_config(const ParsedImage& img, Warnings& w, bool report) {
  const auto& dir = img.directory(kDirLoadConfig);
  if (dir.virtual_address == 0) return std::nullopt;
  const auto head = img.read_rva(dir.virtual_address, 4);
  if (head.size() < 4) {
    if (report) w.add(msg::load_config_invalid, hex(dir.virtual_address));
    return std::nullopt;
  }
  const std::uint32_t declared = ByteView(head).u32(0);
  if (report && dir.size != 0 && declared != dir.size)
    w.add(msg::load_config_size, std::to_string(declared) + " vs " + std::to_string(dir.size));
  const auto body = img.read_rva(dir.virtual_address, std::min<std::uint32_t>(declared, 0x1000));
  const ByteView v(body);
  const bool is64 = img.is_64();
  const std::size_t at_dvrt = is64 ? 192 : 120;
  const std::size_t at_off = is64 ? 224 : 136;
  const std::size_t at_sec = is64 ? 228 : 140;
  LoadConfigFields f;
  const std::size_t width = is64 ? 8 : 4;
  if (declared >= at_dvrt + width && v.has(at_dvrt, width)) f.dvrt = is64 ? v.u64(at_dvrt) : v.u32(at_dvrt);
  if (declared >= at_off + 4 && v.has(at_off, 4)) f.dvrt_offset = v.u32(at_off);
  if (declared >= at_sec + 2 && v.has(at_sec, 2)) f.dvrt_section = v.u16(at_sec);
  return f;
}

bool dynamic_relocations_valid(const ParsedImage& img, const LoadConfigFields& f) {
  std::span<const std::uint8_t> header;
  if (f.dvrt_section != 0 || f.dvrt_offset != 0) {
    if (f.dvrt_section == 0 || f.dvrt_section > img.sections.size()) return false;
    const auto& s = img.sections[f.dvrt_section - 1];
    if (f.dvrt_offset >= s.size_of_raw_data) return false;
    header = ByteView(img.content).slice(static_cast<std::uint64_t>(s.pointer_to_raw_data) + f.dvrt_offset, 8);
    if (header.size() < 8) return false;
    const std::uint32_t version = ByteView(header).u32(0);
    const std::uint32_t size = ByteView(header).u32(4);
    return (version == 1 || version == 2) && size <= s.size_of_raw_data - f.dvrt_offset - 8;
  }
  const std::uint64_t rva = f.dvrt - std::min(f.dvrt, img.optional.image_base);
  header = img.read_rva(rva, 8);
  if (header.size() < 8) return false;
  const std::uint32_t version = ByteView(header).u32(0);
  return version == 1 || version == 2;
}

void check_relocations(const ParsedImage& img, Warnings& w) {
  const auto& dir = img.directory(kDirBaseReloc);
  if (dir.virtual_address == 0 || dir.size == 0) return;
  std::uint64_t off = 0;
  bool bad_type = false;
  for (std::size_t block = 0; off + 8 <= dir.size && block < kMaxRelocBlocks; ++block) {
    const std::uint64_t at = dir.virtual_address + off;
    const auto hdr = img.read_rva(at, 8);
    if (hdr.size() < 8) {
      w.add(msg::relocation_invalid, hex(at));
      return;
    }
    const std::uint32_t size = ByteView(hdr).u32(4);
    if (size < 8 || off + size > dir.size) {
      w.add(msg::relocation_block_size, std::to_string(size) + " at " + hex(at));
      return;
    }
    const auto body = img.read_rva(at, size);
    if (body.size() < size) {
      w.add(msg::relocation_invalid, hex(at));
      return;
    }
    const ByteView b(body);
    for (std::size_t e = 8; e + 2 <= size && !bad_type; e += 2) {
      const int type = b.u16(e) >> 12;
      if (type == 6 || type > 10) {
        w.add(msg::relocation_type_invalid, std::to_string(type));
        bad_type = true;
      }
    }
    off += size;
  }
}

void check_debug(const ParsedImage& img, Warnings& w) {
  const auto& dir = img.directory(kDirDebug);
  if (dir.virtual_address == 0 || dir.size == 0) return;
  if (dir.size % 28 != 0) w.add(msg::debug_size, std::to_string(dir.size));
  const std::uint64_t n = std::min<std::uint64_t>(dir.size / 28, 1024);
  for (std::uint64_t i = 0; i < n; ++i) {
    const std::uint64_t at = dir.virtual_address + 28 * i;
    if (img.read_rva(at, 28).size() < 28) {
      w.add(msg::debug_invalid, hex(at));
      return;
    }
  }
}

void check_tls(const ParsedImage& img, Warnings& w) {
  const auto& dir = img.directory(kDirTls);
  if (dir.virtual_address == 0) return;
  const bool is64 = img.is_64();
  const std::size_t need = is64 ? 40 : 24;
  const auto raw = img.read_rva(dir.virtual_address, need);
  if (raw.size() < need) {
    w.add(msg::tls_invalid, hex(dir.virtual_address));
    return;
  }
  const ByteView v(raw);
  const std::uint64_t callbacks = is64 ? v.u64(24) : v.u32(12);
  if (callbacks == 0) return;
  const std::uint64_t base = img.optional.image_base;
  if (callbacks < base) {
    w.add(msg::tls_callbacks_invalid, hex(callbacks));
    return;
  }
  const std::uint64_t width = is64 ? 8 : 4;
  for (std::size_t i = 0; i < kMaxTlsCallbacks; ++i) {
    const auto slot = img.read_rva(callbacks - base + i * width, width);
    if (slot.size() < width) {
      w.add(msg::tls_callbacks_invalid, hex(callbacks));
      return;
    }
    const std::uint64_t value = is64 ? ByteView(slot).u64(0) : ByteView(slot).u32(0);
    if (value == 0) return;
  }
}

class ResourceWalker {
 public:
  ResourceWalker(const ParsedImage& img, Warnings& w) : img_(img), w_(w) {}

  void walk(std::uint32_t base) {
    base_ = base;
    visit(0, 0);
  }

 private:
  void visit(std::uint32_t offset, int depth) {
    if (stopped_) return;
    if (depth >= kMaxResourceDepth || !visited_.insert(offset).second) {
      w_.add(msg::resource_loop, hex(base_ + static_cast<std::uint64_t>(offset)));
      stopped_ = true;
      return;
    }
    const std::uint64_t at = static_cast<std::uint64_t>(base_) + offset;
    const auto hdr = img_.read_rva(at, 16);
    if (hdr.size() < 16) {
      w_.add(msg::resource_invalid, hex(at));
      stopped_ = true;
      return;
    }
    const std::uint32_t count = static_cast<std::uint32_t>(ByteView(hdr).u16(12)) + ByteView(hdr).u16(14);
    for (std::uint32_t i = 0; i < count && !stopped_; ++i) {
      if (++entries_ > kMaxResourceEntries) {
        w_.add(msg::resource_entries_limit);
        stopped_ = true;
        return;
      }
      const auto entry = img_.read_rva(at + 16 + 8ull * i, 8);
      if (entry.size() < 8) {
        w_.add(msg::resource_invalid, hex(at + 16 + 8ull * i));
        stopped_ = true;
        return;
      }
      const std::uint32_t target = ByteView(entry).u32(4);
      if (target & 0x80000000u) {
        visit(target & 0x7FFFFFFFu, depth + 1);
      } else if (img_.read_rva(static_cast<std::uint64_t>(base_) + target, 16).size() < 16) {
        w_.add(msg::resource_invalid, hex(static_cast<std::uint64_t>(base_) + target));
        stopped_ = true;
      }
    }
  }

  const ParsedImage& img_;
  Warnings& w_;
  std::uint32_t base_ = 0;
  std::set<std::uint32_t> visited_;
  std::size_t entries_ = 0;
  bool stopped_ = false;
};

void check_clr(const ParsedImage& img, Warnings& w) {
  const auto& dir = img.directory(kDirClr);
  if (dir.virtual_address == 0) return;
  const auto raw = img.read_rva(dir.virtual_address, 72);
  if (raw.size() < 72 || ByteView(raw).u32(0) < 72) w.add(msg::clr_header_invalid, hex(dir.virtual_address));
}

}  // namespace

PeGeneralFeatures general_pe_features(const ParsedImage& img, Warnings& w) {
  PeGeneralFeatures g;
  g.vsize = img.optional.sizeof_image;
  const auto& reloc = img.directory(kDirBaseReloc);
  g.has_relocs = (reloc.virtual_address != 0 || reloc.size != 0) ? 1 : 0;
  g.symbols = img.number_of_symbols;
  if (auto lc = read_load_config(img, w, false)) {
    const bool present = lc->dvrt != 0 || lc->dvrt_offset != 0 || lc->dvrt_section != 0;
    if (present) {
      g.has_dynamic_relocs = 1;
      if (!dynamic_relocations_valid(img, *lc)) w.add(msg::dynamic_relocation_invalid);
    }
  }
  return g;
}

void check_directories(const ParsedImage& img, Warnings& w) {
  const std::uint64_t image_size = img.optional.sizeof_image;
  for (std::size_t i = 0; i < img.directories.size(); ++i) {
    if (i == kDirSecurity) continue;
    const auto& d = img.directories[i];
    if (d.virtual_address == 0) continue;
    const std::string tag = std::string(kDataDirectoryNames[i]);
    if (static_cast<std::uint64_t>(d.virtual_address) + d.size > image_size) {
      w.add(msg::directory_outside_image, tag);
    } else if (!img.rva_to_offset(d.virtual_address)) {
      w.add(msg::directory_not_file_backed, tag);
    }
  }

  const auto& sec = img.directory(kDirSecurity);
  if (sec.size != 0 &&
      (sec.virtual_address == 0 || static_cast<std::uint64_t>(sec.virtual_address) + sec.size > img.content.size()))
    w.add(msg::security_directory_invalid, hex(sec.virtual_address));

  const auto& bound = img.directory(kDirBoundImport);
  if (bound.virtual_address != 0 && img.read_rva(bound.virtual_address, 8).size() < 8)
    w.add(msg::bound_import_invalid, hex(bound.virtual_address));

  check_relocations(img, w);
  check_debug(img, w);
  check_tls(img, w);
  read_load_config(img, w, true);
  if (img.directory(kDirResource).virtual_address != 0)
    ResourceWalker(img, w).walk(img.directory(kDirResource).virtual_address);
  check_clr(img, w);
}

}  // namespace ember::pe
