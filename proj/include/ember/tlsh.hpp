#pragma once

// TLSH locality-sensitive digests: 128 buckets, 1-byte checksum, "T1"
// textual form (72 hex characters including the prefix).

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ember::tlsh {

inline constexpr std::size_t kMinLength = 50;
inline constexpr int kDefaultThreshold = 30;
inline constexpr std::size_t kBodyBytes = 32;
inline constexpr std::size_t kTextLength = 72;

class TlshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Digest {
  std::uint8_t checksum = 0;
  std::uint8_t lvalue = 0;
  std::uint8_t q1ratio = 0;  // 4 bits
  std::uint8_t q2ratio = 0;  // 4 bits
  // Bucket codes, body[i] holding buckets 4i..4i+3 in its 2-bit lanes from
  // the low end. The textual form lists these bytes in reverse.
  std::array<std::uint8_t, kBodyBytes> body{};

  std::string to_string() const;
  // Accepts the "T1" form and the legacy unprefixed 70-character form.
  static std::optional<Digest> parse(std::string_view text);

  bool operator==(const Digest&) const = default;
};

// Incremental digest over a byte stream.
class Hasher {
 public:
  void update(std::span<const std::uint8_t> data);
  // nullopt when fewer than kMinLength bytes were fed or the bucket
  // distribution is too flat (q3 == 0 or at most half the buckets used).
  std::optional<Digest> finish() const;

 private:
  std::array<std::uint32_t, 256> buckets_{};
  std::array<std::uint8_t, 5> window_{};
  std::uint64_t length_ = 0;
  std::uint8_t checksum_ = 0;
};

std::optional<Digest> digest(std::span<const std::uint8_t> content);
std::optional<std::string> digest_text(std::span<const std::uint8_t> content);

// Length-bucket code for a byte count.
std::uint8_t length_code(std::uint64_t length);

// Header terms (length, quartile ratios, checksum) and body term combined.
int distance(const Digest& a, const Digest& b, bool include_length = true);
// Header terms only; the body term is added by the caller.
int header_distance(const Digest& a, const Digest& b, bool include_length = true);
// Throws TlshError if either digest is missing.
int distance(const std::optional<Digest>& a, const std::optional<Digest>& b);

// Missing digests are never duplicates.
bool is_near_duplicate(const std::optional<Digest>& a, const std::optional<Digest>& b,
                       int threshold = kDefaultThreshold);

}  // namespace ember::tlsh
