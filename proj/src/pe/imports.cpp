#include <algorithm>
#include <cstdio>
#include <unordered_map>

#include "bytes.hpp"
#include "ember/pe/constants.hpp"
#include "ember/pe/pe.hpp"
#include "messages.hpp"

namespace ember::pe {
namespace {

constexpr std::size_t kMaxDescriptors = 4096;
constexpr std::size_t kMaxThunks = 65536;
constexpr std::size_t kMaxImportedSymbols = 200000;
constexpr std::size_t kMaxExports = 65536;

std::string hex(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(v));
  return buf;
}

class ImportCollector {
 public:
  std::vector<std::string>& library(const std::string& name) {
    auto [it, inserted] = index_.try_emplace(name, map_.size());
    if (inserted) map_.emplace_back(name, std::vector<std::string>{});
    return map_[it->second].second;
  }
  bool full() const { return symbols_ >= kMaxImportedSymbols; }
  void count() { ++symbols_; }
  ImportMap take() { return std::move(map_); }

 private:
  ImportMap map_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t symbols_ = 0;
};

// Walks one import lookup table. `bias` is subtracted from addresses
// stored as VAs (old-style delay imports).
void walk_thunks(const ParsedImage& img, std::uint64_t table_rva, std::uint64_t bias, std::vector<std::string>& out,
                 ImportCollector& collector, Warnings& w) {
  const bool is64 = img.is_64();
  const std::uint64_t width = is64 ? 8 : 4;
  const std::uint64_t ordinal_flag = is64 ? (1ull << 63) : (1ull << 31);
  const std::uint64_t reserved_mask = is64 ? 0x7FFFFFFFFFFF0000ull : 0x7FFF0000ull;
  for (std::size_t k = 0;; ++k) {
    if (k >= kMaxThunks || collector.full()) {
      w.add(msg::import_thunks_limit, hex(table_rva));
      return;
    }
    const std::uint64_t at = table_rva + k * width;
    std::optional<std::uint64_t> entry;
    if (is64) {
      entry = img.u64_at(at);
    } else if (auto e = img.u32_at(at)) {
      entry = *e;
    }
    if (!entry) {
      w.add(msg::import_thunks_invalid, hex(at));
      return;
    }
    if (*entry == 0) return;
    if (*entry & ordinal_flag) {
      if (*entry & reserved_mask) w.add(msg::import_ordinal_invalid, hex(*entry));
      out.push_back("ordinal" + std::to_string(*entry & 0xFFFF));
      collector.count();
      continue;
    }
    std::uint64_t hint_rva = *entry & 0x7FFFFFFFull;
    if (is64 && (*entry >> 31) != 0) {
      w.add(msg::import_thunks_invalid, hex(at));
      return;
    }
    hint_rva -= std::min(hint_rva, bias);
    auto name = img.string_at(hint_rva + 2);
    if (!name || name->empty()) {
      w.add(msg::import_symbol_name_invalid, hex(hint_rva));
      return;
    }
    out.push_back(std::move(*name));
    collector.count();
  }
}

void parse_imports(const ParsedImage& img, ImportCollector& collector, Warnings& w) {
  const auto& dir = img.directory(kDirImport);
  if (dir.virtual_address == 0) return;
  for (std::size_t i = 0;; ++i) {
    if (i >= kMaxDescriptors) {
      w.add(msg::import_descriptor_limit);
      return;
    }
    const std::uint64_t at = static_cast<std::uint64_t>(dir.virtual_address) + 20 * i;
    const auto desc = img.read_rva(at, 20);
    if (desc.size() < 20) {
      w.add(msg::import_directory_invalid, hex(at));
      return;
    }
    if (std::all_of(desc.begin(), desc.end(), [](std::uint8_t b) { return b == 0; })) return;
    const ByteView d(desc);
    const std::uint32_t oft = d.u32(0);
    const std::uint32_t name_rva = d.u32(12);
    const std::uint32_t ft = d.u32(16);
    auto lib = img.string_at(name_rva, 256);
    if (!lib || lib->empty()) {
      w.add(msg::import_library_name_invalid, hex(name_rva));
      continue;
    }
    auto& symbols = collector.library(*lib);
    const std::uint32_t table = oft != 0 ? oft : ft;
    if (table != 0) walk_thunks(img, table, 0, symbols, collector, w);
  }
}

void parse_delay_imports(const ParsedImage& img, ImportCollector& collector, Warnings& w) {
  const auto& dir = img.directory(kDirDelayImport);
  if (dir.virtual_address == 0) return;
  for (std::size_t i = 0;; ++i) {
    if (i >= kMaxDescriptors) {
      w.add(msg::import_descriptor_limit, "(delay)");
      return;
    }
    const std::uint64_t at = static_cast<std::uint64_t>(dir.virtual_address) + 32 * i;
    const auto desc = img.read_rva(at, 32);
    if (desc.size() < 32) {
      w.add(msg::delay_import_invalid, hex(at));
      return;
    }
    if (std::all_of(desc.begin(), desc.end(), [](std::uint8_t b) { return b == 0; })) return;
    const ByteView d(desc);
    const std::uint32_t attributes = d.u32(0);
    std::uint64_t bias = 0;
    if ((attributes & 1) == 0) {
      w.add(msg::delay_import_attributes);
      bias = img.optional.image_base;
    }
    auto unbias = [&](std::uint64_t v) { return v - std::min(v, bias); };
    const std::uint64_t name_rva = unbias(d.u32(4));
    const std::uint64_t int_rva = unbias(d.u32(16));
    auto lib = img.string_at(name_rva, 256);
    if (!lib || lib->empty()) {
      w.add(msg::delay_import_invalid, hex(at));
      continue;
    }
    auto& symbols = collector.library(*lib);
    if (int_rva != 0) walk_thunks(img, int_rva, bias, symbols, collector, w);
  }
}

std::vector<std::string> parse_exports(const ParsedImage& img, Warnings& w) {
  std::vector<std::string> out;
  const auto& dir = img.directory(kDirExport);
  if (dir.virtual_address == 0) return out;
  const auto raw = img.read_rva(dir.virtual_address, 40);
  if (raw.size() < 40) {
    w.add(msg::export_directory_invalid, hex(dir.virtual_address));
    return out;
  }
  const ByteView d(raw);
  const std::uint32_t nfuncs = d.u32(20);
  std::uint32_t nnames = d.u32(24);
  const std::uint32_t funcs_rva = d.u32(28);
  const std::uint32_t names_rva = d.u32(32);
  const std::uint32_t ords_rva = d.u32(36);

  if (nnames > nfuncs) w.add(msg::export_count_suspicious, std::to_string(nnames) + " > " + std::to_string(nfuncs));
  if (nfuncs > 0 && img.read_rva(funcs_rva, 4).size() < 4) w.add(msg::export_functions_rva, hex(funcs_rva));
  if (nnames == 0) return out;
  if (img.read_rva(names_rva, 4).size() < 4) {
    w.add(msg::export_names_rva, hex(names_rva));
    return out;
  }
  const bool ords_ok = img.read_rva(ords_rva, 2).size() == 2;
  if (!ords_ok) w.add(msg::export_ordinals_rva, hex(ords_rva));

  nnames = std::min<std::uint32_t>(nnames, kMaxExports);
  std::unordered_map<std::uint32_t, int> seen;
  for (std::uint32_t i = 0; i < nnames; ++i) {
    auto name_ptr = img.u32_at(static_cast<std::uint64_t>(names_rva) + 4ull * i);
    if (!name_ptr) {
      w.add(msg::export_names_rva, hex(static_cast<std::uint64_t>(names_rva) + 4ull * i));
      break;
    }
    if (++seen[*name_ptr] > 10) {
      w.add(msg::export_repeated_entries);
      break;
    }
    if (ords_ok) {
      const auto ob = img.read_rva(static_cast<std::uint64_t>(ords_rva) + 2ull * i, 2);
      if (ob.size() == 2 && ByteView(ob).u16(0) >= nfuncs) w.add(msg::export_ordinal_range, std::to_string(i));
    }
    auto name = img.string_at(*name_ptr);
    if (!name) {
      w.add(msg::export_name_invalid, hex(*name_ptr));
      continue;
    }
    out.push_back(std::move(*name));
  }
  return out;
}

}  // namespace

ImportsExports extract_imports_exports(const ParsedImage& img, Warnings& w) {
  ImportCollector collector;
  parse_imports(img, collector, w);
  parse_delay_imports(img, collector, w);
  ImportsExports out;
  out.imports = collector.take();
  out.exports = parse_exports(img, w);
  return out;
}

}  // namespace ember::pe
