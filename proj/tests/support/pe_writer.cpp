#include "pe_writer.hpp"

#include <algorithm>
#include <cstring>

namespace ember::testing {
namespace {

class Buf {
 public:
  std::vector<std::uint8_t> bytes;

  void grow(std::size_t n) {
    if (bytes.size() < n) bytes.resize(n, 0);
  }
  void put8(std::size_t at, std::uint8_t v) {
    grow(at + 1);
    bytes[at] = v;
  }
  void put16(std::size_t at, std::uint16_t v) {
    put8(at, v & 0xFF);
    put8(at + 1, v >> 8);
  }
  void put32(std::size_t at, std::uint32_t v) {
    put16(at, v & 0xFFFF);
    put16(at + 2, v >> 16);
  }
  void put64(std::size_t at, std::uint64_t v) {
    put32(at, static_cast<std::uint32_t>(v));
    put32(at + 4, static_cast<std::uint32_t>(v >> 32));
  }
  void put_bytes(std::size_t at, const void* src, std::size_t n) {
    grow(at + n);
    if (n) std::memcpy(bytes.data() + at, src, n);
  }
  void put_str(std::size_t at, const std::string& s) {
    put_bytes(at, s.data(), s.size());
    put8(at + s.size(), 0);
  }
};

std::uint32_t align_up(std::uint32_t v, std::uint32_t a) { return (v + a - 1) / a * a; }

std::uint32_t rotl(std::uint32_t v, unsigned r) {
  r &= 31;
  return r == 0 ? v : (v << r) | (v >> (32 - r));
}

struct Blob {
  std::vector<std::uint8_t> data;
  std::uint32_t dir_offset = 0;
  std::uint32_t dir_size = 0;
};

Blob import_blob(const std::vector<ImportSpec>& imports, std::uint32_t va, bool pe64) {
  Buf b;
  const std::uint32_t w = pe64 ? 8 : 4;
  const std::uint32_t desc_bytes = static_cast<std::uint32_t>(20 * (imports.size() + 1));
  std::uint32_t cursor = desc_bytes;
  for (std::size_t i = 0; i < imports.size(); ++i) {
    const auto& imp = imports[i];
    const std::uint32_t n = static_cast<std::uint32_t>(imp.names.size() + imp.ordinals.size());
    const std::uint32_t ilt = cursor;
    const std::uint32_t iat = ilt + (n + 1) * w;
    cursor = iat + (n + 1) * w;
    std::uint32_t slot = 0;
    auto put_thunk = [&](std::uint64_t v) {
      if (pe64) {
        b.put64(ilt + slot * w, v);
        b.put64(iat + slot * w, v);
      } else {
        b.put32(ilt + slot * w, static_cast<std::uint32_t>(v));
        b.put32(iat + slot * w, static_cast<std::uint32_t>(v));
      }
      ++slot;
    };
    for (const auto& name : imp.names) {
      const std::uint32_t hint = cursor;
      b.put16(hint, static_cast<std::uint16_t>(slot));
      b.put_str(hint + 2, name);
      cursor = align_up(hint + 2 + static_cast<std::uint32_t>(name.size()) + 1, 2);
      put_thunk(va + hint);
    }
    for (std::uint16_t ord : imp.ordinals) put_thunk((pe64 ? (1ull << 63) : (1ull << 31)) | ord);
    put_thunk(0);
    const std::uint32_t dll_name = cursor;
    b.put_str(dll_name, imp.dll);
    cursor = align_up(dll_name + static_cast<std::uint32_t>(imp.dll.size()) + 1, 4);

    const std::size_t d = 20 * i;
    b.put32(d + 0, va + ilt);
    b.put32(d + 12, va + dll_name);
    b.put32(d + 16, va + iat);
  }
  b.grow(cursor);
  return {b.bytes, 0, desc_bytes};
}

Blob export_blob(const std::vector<std::string>& names, std::uint32_t va, std::uint32_t func_rva) {
  Buf b;
  const std::uint32_t n = static_cast<std::uint32_t>(names.size());
  const std::uint32_t funcs = 40;
  const std::uint32_t name_ptrs = funcs + 4 * n;
  const std::uint32_t ords = name_ptrs + 4 * n;
  std::uint32_t cursor = align_up(ords + 2 * n, 4);
  const std::uint32_t dll = cursor;
  b.put_str(dll, "synthetic.dll");
  cursor += 14;
  for (std::uint32_t i = 0; i < n; ++i) {
    b.put32(funcs + 4 * i, func_rva + 16 * i);
    b.put32(name_ptrs + 4 * i, va + cursor);
    b.put16(ords + 2 * i, static_cast<std::uint16_t>(i));
    b.put_str(cursor, names[i]);
    cursor += static_cast<std::uint32_t>(names[i].size()) + 1;
  }
  b.put32(12, va + dll);
  b.put32(16, 1);
  b.put32(20, n);
  b.put32(24, n);
  b.put32(28, va + funcs);
  b.put32(32, va + name_ptrs);
  b.put32(36, va + ords);
  b.grow(cursor);
  return {b.bytes, 0, cursor};
}

}  // namespace

std::uint32_t reference_checksum(const std::vector<std::uint8_t>& image, std::size_t checksum_offset) {
  std::uint64_t sum = 0;
  const std::size_t words = (image.size() + 3) / 4;
  for (std::size_t i = 0; i < words; ++i) {
    if (i == checksum_offset / 4) continue;
    std::uint32_t v = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      const std::size_t at = 4 * i + k;
      if (at < image.size()) v |= static_cast<std::uint32_t>(image[at]) << (8 * k);
    }
    sum += v;
    if (sum >= (1ull << 32)) sum = (sum & 0xFFFFFFFFull) + (sum >> 32);
  }
  sum = (sum & 0xFFFF) + (sum >> 16);
  sum += sum >> 16;
  sum &= 0xFFFF;
  return static_cast<std::uint32_t>(sum + image.size());
}

std::vector<std::uint8_t> build_pe(const PeSpec& spec, PeLayout* out_layout) {
  PeLayout L;
  Buf b;
  b.grow(64);
  b.put16(0, 0x5A4D);
  for (std::size_t i = 0; i < spec.dos_words.size(); ++i) b.put16(2 + 2 * i, spec.dos_words[i]);
  b.put16(36, spec.e_oemid);
  b.put16(38, spec.e_oeminfo);

  std::uint32_t cursor = 0x80;
  if (!spec.rich.empty()) {
    const std::uint32_t dans = 0x80;
    std::uint32_t key = dans;
    for (std::uint32_t i = 0; i < dans; ++i) {
      if (i >= 0x3C && i < 0x40) continue;
      const std::uint8_t byte = i < b.bytes.size() ? b.bytes[i] : 0;
      key += rotl(byte, i);
    }
    for (const auto& e : spec.rich) key += rotl(e.compid, e.count & 31);
    const std::uint32_t stored_key = spec.corrupt_rich_key ? key ^ 0x1 : key;
    b.put32(dans, 0x536E6144 ^ stored_key);
    for (int k = 1; k <= 3; ++k) b.put32(dans + 4 * k, stored_key);
    std::uint32_t at = dans + 16;
    for (const auto& e : spec.rich) {
      b.put32(at, e.compid ^ stored_key);
      b.put32(at + 4, e.count ^ stored_key);
      at += 8;
    }
    b.put_bytes(at, "Rich", 4);
    b.put32(at + 4, stored_key);
    cursor = align_up(at + 8, 8);
  }
  L.e_lfanew = cursor;
  b.put32(60, L.e_lfanew);

  const std::uint32_t opt_fixed = spec.pe64 ? 112 : 96;
  const std::uint32_t ndirs = std::min<std::uint32_t>(spec.number_of_rvas_and_sizes, 16);
  const std::uint16_t sizeof_opt = static_cast<std::uint16_t>(opt_fixed + 8 * ndirs);

  std::vector<SectionSpec> sections = spec.sections;
  const bool want_idata = !spec.imports.empty();
  const bool want_edata = !spec.exports.empty();
  const std::size_t nsect = sections.size() + want_idata + want_edata;
  const std::uint32_t table = L.e_lfanew + 24 + sizeof_opt;
  L.sizeof_headers = align_up(table + 40 * static_cast<std::uint32_t>(nsect), spec.file_alignment);

  std::uint32_t va = align_up(L.sizeof_headers, spec.section_alignment);
  std::uint32_t raw = L.sizeof_headers;
  auto place = [&](const std::string& name, std::uint32_t vsize, std::uint32_t chars, std::uint32_t raw_len) {
    PeLayout::Placed p{name, va, vsize, raw_len ? raw : 0, align_up(raw_len, spec.file_alignment), chars};
    va = align_up(va + std::max(vsize, p.raw_size), spec.section_alignment);
    raw += p.raw_size;
    L.sections.push_back(p);
    return L.sections.size() - 1;
  };
  for (const auto& s : sections) place(s.name, s.virtual_size, s.characteristics, static_cast<std::uint32_t>(s.data.size()));

  std::vector<std::vector<std::uint8_t>> payloads;
  for (const auto& s : sections) payloads.push_back(s.data);
  if (want_idata) {
    const std::uint32_t idata_va = va;
    Blob blob = import_blob(spec.imports, idata_va, spec.pe64);
    place(".idata", static_cast<std::uint32_t>(blob.data.size()), 0xC0000040, static_cast<std::uint32_t>(blob.data.size()));
    L.directories[1] = {idata_va + blob.dir_offset, blob.dir_size};
    payloads.push_back(std::move(blob.data));
  }
  if (want_edata) {
    const std::uint32_t edata_va = va;
    const std::uint32_t func_rva = L.sections.empty() ? edata_va : L.sections[0].va;
    Blob blob = export_blob(spec.exports, edata_va, func_rva);
    place(".edata", static_cast<std::uint32_t>(blob.data.size()), 0x40000040, static_cast<std::uint32_t>(blob.data.size()));
    L.directories[0] = {edata_va, blob.dir_size};
    payloads.push_back(std::move(blob.data));
  }
  L.sizeof_image = va;
  L.sections_end = raw;
  if (!L.sections.empty()) {
    L.address_of_entrypoint = L.sections[0].va + spec.entry_offset;
    L.base_of_code = L.sections[0].va;
  }
  for (const auto& d : spec.extra_directories) L.directories[d[0]] = {d[1], d[2]};

  const std::size_t coff = L.e_lfanew + 4;
  b.put32(L.e_lfanew, 0x00004550);
  b.put16(coff, spec.machine);
  b.put16(coff + 2, static_cast<std::uint16_t>(nsect));
  b.put32(coff + 4, spec.timestamp);
  b.put32(coff + 8, spec.pointer_to_symbol_table);
  b.put32(coff + 12, spec.number_of_symbols);
  b.put16(coff + 16, sizeof_opt);
  b.put16(coff + 18, spec.characteristics);

  const std::size_t o = coff + 20;
  b.put16(o, spec.pe64 ? 0x20b : 0x10b);
  b.put8(o + 2, spec.major_linker);
  b.put8(o + 3, spec.minor_linker);
  b.put32(o + 4, spec.sizeof_code);
  b.put32(o + 8, spec.sizeof_initialized_data);
  b.put32(o + 12, spec.sizeof_uninitialized_data);
  b.put32(o + 16, L.address_of_entrypoint);
  b.put32(o + 20, L.base_of_code);
  std::size_t p;
  if (spec.pe64) {
    b.put64(o + 24, spec.image_base);
  } else {
    b.put32(o + 24, spec.base_of_data);
    b.put32(o + 28, static_cast<std::uint32_t>(spec.image_base));
  }
  p = o + 32;
  b.put32(p, spec.section_alignment);
  b.put32(p + 4, spec.file_alignment);
  b.put16(p + 8, spec.major_os);
  b.put16(p + 10, spec.minor_os);
  b.put16(p + 12, spec.major_image);
  b.put16(p + 14, spec.minor_image);
  b.put16(p + 16, spec.major_subsystem);
  b.put16(p + 18, spec.minor_subsystem);
  b.put32(p + 20, 0);
  b.put32(p + 24, L.sizeof_image);
  b.put32(p + 28, L.sizeof_headers);
  b.put32(p + 32, 0);  // checksum, patched below
  b.put16(p + 36, spec.subsystem);
  b.put16(p + 38, spec.dll_characteristics);
  p += 40;
  const std::size_t w = spec.pe64 ? 8 : 4;
  const std::uint64_t mem[4] = {spec.stack_reserve, spec.stack_commit, spec.heap_reserve, spec.heap_commit};
  for (int i = 0; i < 4; ++i) {
    if (spec.pe64) {
      b.put64(p + w * i, mem[i]);
    } else {
      b.put32(p + w * i, static_cast<std::uint32_t>(mem[i]));
    }
  }
  p += 4 * w;
  b.put32(p, 0);
  b.put32(p + 4, spec.number_of_rvas_and_sizes);
  p += 8;

  for (std::size_t i = 0; i < nsect; ++i) {
    const auto& s = L.sections[i];
    const std::size_t at = table + 40 * i;
    char name[8] = {};
    std::memcpy(name, s.name.data(), std::min<std::size_t>(8, s.name.size()));
    b.put_bytes(at, name, 8);
    b.put32(at + 8, s.vsize);
    b.put32(at + 12, s.va);
    b.put32(at + 16, s.raw_size);
    b.put32(at + 20, s.raw_ptr);
    b.put32(at + 36, s.characteristics);
    b.grow(s.raw_ptr + s.raw_size);
    b.put_bytes(s.raw_ptr, payloads[i].data(), payloads[i].size());
  }
  b.grow(std::max<std::size_t>(L.sizeof_headers, L.sections_end));

  if (!spec.certificate_table.empty()) {
    L.certificate_offset = align_up(static_cast<std::uint32_t>(b.bytes.size()), 8);
    b.grow(L.certificate_offset);
    b.put_bytes(L.certificate_offset, spec.certificate_table.data(), spec.certificate_table.size());
    L.directories[4] = {L.certificate_offset, static_cast<std::uint32_t>(spec.certificate_table.size())};
  }
  b.put_bytes(b.bytes.size(), spec.overlay.data(), spec.overlay.size());

  for (std::uint32_t i = 0; i < ndirs; ++i) {
    b.put32(p + 8 * i, L.directories[i][0]);
    b.put32(p + 8 * i + 4, L.directories[i][1]);
  }

  const std::size_t checksum_at = o + 64;
  if (spec.write_checksum) {
    L.checksum = reference_checksum(b.bytes, checksum_at);
    b.put32(checksum_at, L.checksum);
  }
  if (out_layout) *out_layout = L;
  return b.bytes;
}

PeSpec random_spec(SplitMix64& rng) {
  static const std::uint16_t kMachines32[] = {0x14c, 0x1c4};
  static const std::uint16_t kMachines64[] = {0x8664, 0xaa64};
  static const char* kNames[] = {".text", ".rdata", ".data", ".pdata", ".rsrc", ".reloc", "UPX0", ".tls"};
  static const std::uint32_t kChars[] = {0x60000020, 0x40000040, 0xC0000040, 0x42000040, 0xE0000020};
  static const char* kDlls[] = {"KERNEL32.dll", "USER32.dll", "ADVAPI32.dll", "ws2_32.dll", "msvcrt.dll"};
  static const char* kSyms[] = {"CloseHandle", "CopyFileW", "CreateFileA", "ReadFile", "WriteFile",
                                "RegOpenKeyExW", "socket", "connect", "malloc", "GetProcAddress"};

  PeSpec s;
  s.pe64 = rng.below(2) == 1;
  s.machine = s.pe64 ? kMachines64[rng.below(2)] : kMachines32[rng.below(2)];
  s.image_base = s.pe64 ? 0x140000000ull + 0x10000ull * rng.below(64) : 0x400000ull + 0x10000ull * rng.below(64);
  for (auto& wv : s.dos_words) wv = static_cast<std::uint16_t>(rng.next());
  s.e_oemid = static_cast<std::uint16_t>(rng.next());
  s.e_oeminfo = static_cast<std::uint16_t>(rng.next());
  s.timestamp = static_cast<std::uint32_t>(rng.next());
  s.pointer_to_symbol_table = rng.below(4) == 0 ? static_cast<std::uint32_t>(rng.next()) : 0;
  s.number_of_symbols = rng.below(4) == 0 ? static_cast<std::uint32_t>(rng.below(5000)) : 0;
  s.characteristics = static_cast<std::uint16_t>(0x0002 | (rng.next() & 0xA3A1));
  s.major_linker = static_cast<std::uint8_t>(rng.below(256));
  s.minor_linker = static_cast<std::uint8_t>(rng.below(256));
  s.major_os = static_cast<std::uint16_t>(rng.below(11));
  s.minor_os = static_cast<std::uint16_t>(rng.below(4));
  s.major_image = static_cast<std::uint16_t>(rng.below(100));
  s.minor_image = static_cast<std::uint16_t>(rng.below(100));
  s.major_subsystem = static_cast<std::uint16_t>(rng.below(11));
  s.minor_subsystem = static_cast<std::uint16_t>(rng.below(4));
  s.subsystem = static_cast<std::uint16_t>(rng.below(17));
  s.dll_characteristics = static_cast<std::uint16_t>(rng.next() & 0xFFE0);
  s.stack_reserve = 0x1000ull * (1 + rng.below(4096));
  s.stack_commit = 0x1000ull * (1 + rng.below(16));
  s.heap_reserve = 0x1000ull * (1 + rng.below(4096));
  s.heap_commit = 0x1000ull * (1 + rng.below(16));
  s.base_of_data = s.pe64 ? 0 : static_cast<std::uint32_t>(rng.next());
  s.sizeof_code = static_cast<std::uint32_t>(rng.next());
  s.sizeof_initialized_data = static_cast<std::uint32_t>(rng.next());
  s.sizeof_uninitialized_data = static_cast<std::uint32_t>(rng.below(4) == 0 ? rng.next() : 0);
  s.file_alignment = rng.below(3) == 0 ? 0x1000 : 0x200;
  s.section_alignment = 0x1000;
  s.write_checksum = rng.below(2) == 1;

  const std::size_t nsec = 1 + rng.below(6);
  for (std::size_t i = 0; i < nsec; ++i) {
    SectionSpec sec;
    sec.name = kNames[rng.below(8)];
    const std::size_t len = rng.below(3) == 0 ? 0 : 1 + rng.below(3000);
    sec.data = splitmix_bytes(rng.next(), len);
    if (rng.below(2)) std::fill(sec.data.begin(), sec.data.begin() + static_cast<long>(len / 2), 0);
    sec.virtual_size = static_cast<std::uint32_t>(len == 0 ? 1 + rng.below(0x3000) : len + rng.below(64));
    sec.characteristics = i == 0 ? 0x60000020 : kChars[rng.below(5)];
    s.sections.push_back(std::move(sec));
  }
  s.entry_offset = static_cast<std::uint32_t>(rng.below(s.sections[0].virtual_size));

  const std::size_t nimp = rng.below(4);
  for (std::size_t i = 0; i < nimp; ++i) {
    ImportSpec imp;
    imp.dll = kDlls[i];
    const std::size_t k = 1 + rng.below(5);
    for (std::size_t j = 0; j < k; ++j) imp.names.push_back(kSyms[rng.below(10)]);
    if (rng.below(3) == 0) imp.ordinals.push_back(static_cast<std::uint16_t>(1 + rng.below(500)));
    s.imports.push_back(std::move(imp));
  }
  if (rng.below(3) == 0) {
    const std::size_t k = 1 + rng.below(6);
    for (std::size_t j = 0; j < k; ++j) s.exports.push_back("Export" + std::to_string(j));
  }
  if (rng.below(2)) {
    const std::size_t k = 1 + rng.below(8);
    for (std::size_t j = 0; j < k; ++j)
      s.rich.push_back({static_cast<std::uint32_t>(rng.next()), static_cast<std::uint32_t>(1 + rng.below(400))});
  }
  if (rng.below(3) == 0) {
    s.overlay = splitmix_bytes(rng.next(), 1 + rng.below(2000));
  }
  return s;
}

}  // namespace ember::testing
