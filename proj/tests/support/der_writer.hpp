#pragma once

// DER encoder for fabricating Authenticode-shaped PKCS#7 blobs in tests.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ember::testing::der {

using Bytes = std::vector<std::uint8_t>;

Bytes tlv(std::uint8_t tag, const Bytes& content);
Bytes seq(std::initializer_list<Bytes> parts);
Bytes set(std::initializer_list<Bytes> parts);
Bytes concat(const std::vector<Bytes>& parts);
Bytes oid(const std::string& dotted);
Bytes integer(std::uint64_t v);
Bytes utf8(const std::string& s);
// "YYMMDDHHMMSSZ"
Bytes utc_time(const std::string& s);
Bytes name(const std::string& common_name);

struct CertSpec {
  std::string issuer;
  std::string subject;
  std::string not_before;  // UTCTime text
  std::string not_after = "491231235959Z";
};

Bytes certificate(const CertSpec& c);

struct SignatureSpec {
  std::vector<CertSpec> certs;
  std::optional<std::string> program_name;  // nullopt: no opus attribute
  bool countersigned = false;
};

// ContentInfo { signedData, [0] SignedData }.
Bytes pkcs7(const SignatureSpec& s);

// WIN_CERTIFICATE wrapper, padded to 8 bytes.
Bytes win_certificate(const Bytes& pkcs7_blob, std::uint16_t revision = 0x0200, std::uint16_t type = 2);

}  // namespace ember::testing::der
