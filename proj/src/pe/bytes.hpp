#pragma once

// Bounds-checked little-endian reads over a borrowed byte range.

#include <cstdint>
#include <optional>
#include <span>
#include <string>

namespace ember::pe {

class ByteView {
 public:
  ByteView() = default;
  explicit ByteView(std::span<const std::uint8_t> data) : data_(data) {}

  std::size_t size() const { return data_.size(); }
  std::span<const std::uint8_t> data() const { return data_; }

  bool has(std::uint64_t offset, std::uint64_t n) const {
    return offset <= data_.size() && n <= data_.size() - offset;
  }

  // Callers check has() first.
  std::uint8_t u8(std::size_t off) const { return data_[off]; }
  std::uint16_t u16(std::size_t off) const {
    return static_cast<std::uint16_t>(data_[off] | (data_[off + 1] << 8));
  }
  std::uint32_t u32(std::size_t off) const {
    return static_cast<std::uint32_t>(data_[off]) | (static_cast<std::uint32_t>(data_[off + 1]) << 8) |
           (static_cast<std::uint32_t>(data_[off + 2]) << 16) | (static_cast<std::uint32_t>(data_[off + 3]) << 24);
  }
  std::uint64_t u64(std::size_t off) const {
    return static_cast<std::uint64_t>(u32(off)) | (static_cast<std::uint64_t>(u32(off + 4)) << 32);
  }

  std::optional<std::uint32_t> try_u32(std::uint64_t off) const {
    if (!has(off, 4)) return std::nullopt;
    return u32(static_cast<std::size_t>(off));
  }

  // Clipped to the end of the range.
  std::span<const std::uint8_t> slice(std::uint64_t off, std::uint64_t n) const {
    if (off >= data_.size()) return {};
    const std::uint64_t avail = data_.size() - off;
    return data_.subspan(static_cast<std::size_t>(off), static_cast<std::size_t>(n < avail ? n : avail));
  }

 private:
  std::span<const std::uint8_t> data_;
};

// Printable ASCII is kept; every other byte is written as \xNN so names
// from hostile files stay valid UTF-8.
inline std::string escape_name(std::span<const std::uint8_t> bytes, bool* had_nonprintable = nullptr) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size());
  bool odd = false;
  for (std::uint8_t b : bytes) {
    if (b >= 0x20 && b <= 0x7E && b != '\\') {
      out.push_back(static_cast<char>(b));
    } else {
      odd = true;
      out += "\\x";
      out.push_back(kHex[b >> 4]);
      out.push_back(kHex[b & 0xF]);
    }
  }
  if (had_nonprintable) *had_nonprintable = odd;
  return out;
}

}  // namespace ember::pe
