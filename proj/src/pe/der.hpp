#pragma once

// Minimal DER walker for the PKCS#7 structures inside Authenticode blobs.
// Definite lengths only; structural inspection, no signature checks.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ember::pe::der {

class DerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum Tag : std::uint8_t {
  kInteger = 0x02,
  kOctetString = 0x04,
  kOid = 0x06,
  kUtcTime = 0x17,
  kGeneralizedTime = 0x18,
  kSequence = 0x30,
  kSet = 0x31,
  kContext0 = 0xA0,
  kContext1 = 0xA1,
};

struct Node {
  std::uint8_t tag = 0;
  std::span<const std::uint8_t> content;
  std::span<const std::uint8_t> whole;  // tag + length + content

  bool constructed() const { return (tag & 0x20) != 0; }
};

// Reads one element from the front of `in` and advances past it.
Node read(std::span<const std::uint8_t>& in);

// Reads exactly one element spanning all of `in`.
Node read_single(std::span<const std::uint8_t> in);

std::vector<Node> children(const Node& n);

// Throws unless n has the expected tag.
const Node& expect(const Node& n, std::uint8_t tag, const char* what);

std::string oid_string(const Node& n);

// UTCTime or GeneralizedTime to UNIX seconds.
std::int64_t time_value(const Node& n);

}  // namespace ember::pe::der
