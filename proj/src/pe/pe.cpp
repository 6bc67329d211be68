#include "ember/pe/constants.hpp"
#include "ember/pe/pe.hpp"

namespace ember::pe {

PeParse parse_pe(std::span<const std::uint8_t> content) {
  PeParse out;
  Warnings w;
  ImageResult parsed = parse_image(content, w);
  if (!parsed.image) {
    out.failure = parsed.failure;
    out.warnings = w.take();
    return out;
  }
  const ParsedImage& img = *parsed.image;

  PeFeatures f;
  f.header = header_features(img);
  check_headers(img, w);
  f.section = extract_sections(img, content.size(), w);
  f.datadirectories = extract_data_directories(img);
  auto ie = extract_imports_exports(img, w);
  f.imports = std::move(ie.imports);
  f.exports = std::move(ie.exports);
  f.richheader = extract_rich_header(content, w);
  check_directories(img, w);
  f.authenticode = extract_authenticode(img, w);
  out.general = general_pe_features(img, w);
  out.has_clr = img.directory(kDirClr).virtual_address != 0;
  out.features = std::move(f);
  out.warnings = w.take();
  return out;
}

}  // namespace ember::pe
