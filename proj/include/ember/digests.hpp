#pragma once

#include <cstdint>
#include <span>
#include <string>

namespace ember {

struct FileDigests {
  std::string md5;     // 32 lowercase hex
  std::string sha1;    // 40
  std::string sha256;  // 64
};

// One pass over content computing all three cryptographic digests (OpenSSL EVP).
FileDigests compute_digests(std::span<const std::uint8_t> content);

std::string to_hex_lower(std::span<const std::uint8_t> bytes);

}  // namespace ember
