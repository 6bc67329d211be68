#include <algorithm>
#include <bit>
#include <cstring>

#include "bytes.hpp"
#include "ember/pe/pe.hpp"
#include "messages.hpp"

namespace ember::pe {
namespace {

constexpr std::uint32_t kDans = 0x536E6144;  // "DanS"

}  // namespace

std::vector<std::uint64_t> extract_rich_header(std::span<const std::uint8_t> content, Warnings& warnings) {
  std::vector<std::uint64_t> out;
  const ByteView v(content);
  if (!v.has(0, 64)) return out;
  std::uint64_t limit = v.u32(60);
  if (limit > content.size()) limit = std::min<std::uint64_t>(content.size(), 0x1000);

  static constexpr std::uint8_t kRich[4] = {'R', 'i', 'c', 'h'};
  std::size_t rich = 0;
  for (std::size_t i = 0x40; i + 8 <= limit; i += 4) {
    if (std::memcmp(content.data() + i, kRich, 4) == 0) {
      rich = i;
      break;
    }
  }
  if (rich == 0) return out;
  const std::uint32_t key = v.u32(rich + 4);

  std::size_t dans = 0;
  for (std::size_t i = rich; i >= 0x40 + 4;) {
    i -= 4;
    if ((v.u32(i) ^ key) == kDans) {
      dans = i;
      break;
    }
  }
  if (dans == 0) {
    warnings.add(msg::rich_header_malformed, "no start marker");
    return out;
  }
  if (dans + 16 > rich || (rich - dans - 16) % 8 != 0) {
    warnings.add(msg::rich_header_malformed, "bad entry area");
    return out;
  }
  for (std::size_t k = 1; k <= 3; ++k) {
    if ((v.u32(dans + 4 * k) ^ key) != 0) {
      warnings.add(msg::rich_header_malformed, "nonzero padding");
      break;
    }
  }

  std::uint32_t sum = static_cast<std::uint32_t>(dans);
  for (std::size_t i = 0; i < dans; ++i) {
    if (i >= 0x3C && i < 0x40) continue;
    sum += std::rotl(static_cast<std::uint32_t>(content[i]), static_cast<int>(i % 32));
  }
  for (std::size_t at = dans + 16; at < rich; at += 8) {
    const std::uint32_t compid = v.u32(at) ^ key;
    const std::uint32_t count = v.u32(at + 4) ^ key;
    out.push_back(compid);
    out.push_back(count);
    sum += std::rotl(compid, static_cast<int>(count & 31));
  }
  if (sum != key) warnings.add(msg::rich_checksum_mismatch);
  return out;
}

}  // namespace ember::pe
