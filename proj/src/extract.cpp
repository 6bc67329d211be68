#include "ember/extract.hpp"

#include <algorithm>
#include <cstring>
#include <string_view>

#include "ember/agnostic.hpp"
#include "ember/pe/pe.hpp"

namespace ember {
namespace {

bool starts_with(std::span<const std::uint8_t> c, std::string_view magic) {
  return c.size() >= magic.size() && std::memcmp(c.data(), magic.data(), magic.size()) == 0;
}

bool contains(std::span<const std::uint8_t> c, std::string_view needle) {
  return std::search(c.begin(), c.end(), needle.begin(), needle.end()) != c.end();
}

std::optional<FileType> non_pe_type(std::span<const std::uint8_t> c) {
  if (starts_with(c, "\x7f" "ELF")) return FileType::elf;
  if (contains(c.first(std::min<std::size_t>(c.size(), 1024)), "%PDF")) return FileType::pdf;
  if (starts_with(c, "PK\x03\x04") && (contains(c, "AndroidManifest.xml") || contains(c, "classes.dex")))
    return FileType::apk;
  return std::nullopt;
}

std::optional<FileType> pe_type(const pe::PeParse& p) {
  if (!p.ok()) return std::nullopt;
  if (p.has_clr) return FileType::dotnet;
  return p.features->header.optional.magic == 0x20b ? FileType::win64 : FileType::win32;
}

}  // namespace

Extraction extract(std::span<const std::uint8_t> content, const PatternSet& patterns) {
  Extraction out;
  RawFeatures& raw = out.raw;
  raw.histogram = byte_histogram(content);
  raw.byteentropy = byte_entropy_histogram(content);
  raw.strings = string_features(content, patterns);
  raw.general = general_features(content);

  if (starts_with(content, "MZ")) {
    pe::PeParse p = pe::parse_pe(content);
    out.detected_type = pe_type(p);
    out.pe_failure = p.failure;
    raw.pefilewarnings = std::move(p.warnings);
    if (p.ok()) {
      raw.pe = std::move(p.features);
      raw.general.pe = p.general;
    }
  } else {
    out.detected_type = non_pe_type(content);
  }
  return out;
}

std::optional<FileType> detect_file_type(std::span<const std::uint8_t> content) {
  if (starts_with(content, "MZ")) return pe_type(pe::parse_pe(content));
  return non_pe_type(content);
}

}  // namespace ember
