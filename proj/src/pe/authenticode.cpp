#include <algorithm>
#include <functional>
#include <map>

#include "bytes.hpp"
#include "der.hpp"
#include "ember/pe/constants.hpp"
#include "ember/pe/pe.hpp"
#include "messages.hpp"

namespace ember::pe {
namespace {

constexpr std::string_view kSignedData = "1.2.840.113549.1.7.2";
constexpr std::string_view kOpusInfo = "1.3.6.1.4.1.311.2.1.12";
constexpr std::string_view kCountersignature = "1.2.840.113549.1.9.6";
constexpr std::string_view kRfc3161Timestamp = "1.3.6.1.4.1.311.3.3.1";
constexpr std::size_t kMaxCertificateEntries = 64;

struct Certificate {
  std::vector<std::uint8_t> issuer;
  std::vector<std::uint8_t> subject;
  std::int64_t not_before = 0;
};

struct SignatureInfo {
  std::vector<Certificate> certs;
  bool has_program_name = false;
  bool has_countersigner = false;
  bool has_signer = false;
};

std::vector<std::uint8_t> bytes_of(const der::Node& n) { return {n.whole.begin(), n.whole.end()}; }

Certificate parse_certificate(const der::Node& cert) {
  const auto outer = der::children(der::expect(cert, der::kSequence, "certificate"));
  if (outer.empty()) throw der::DerError("empty certificate");
  const auto tbs = der::children(der::expect(outer[0], der::kSequence, "tbsCertificate"));
  std::size_t i = 0;
  if (i < tbs.size() && tbs[i].tag == der::kContext0) ++i;  // version
  if (tbs.size() < i + 5) throw der::DerError("short tbsCertificate");
  const der::Node& issuer = der::expect(tbs[i + 2], der::kSequence, "issuer");
  const auto validity = der::children(der::expect(tbs[i + 3], der::kSequence, "validity"));
  const der::Node& subject = der::expect(tbs[i + 4], der::kSequence, "subject");
  if (validity.size() != 2) throw der::DerError("bad validity");
  Certificate c;
  c.issuer = bytes_of(issuer);
  c.subject = bytes_of(subject);
  c.not_before = der::time_value(validity[0]);
  return c;
}

bool program_name_present(const der::Node& opus_value) {
  const auto fields = der::children(der::expect(opus_value, der::kSequence, "SpcSpOpusInfo"));
  for (const auto& f : fields) {
    if (f.tag != der::kContext0) continue;
    auto inner = f.content;
    if (inner.empty()) return false;
    const der::Node choice = der::read(inner);
    if (choice.constructed()) {
      auto nested = choice.content;
      if (nested.empty()) return false;
      return !der::read(nested).content.empty();
    }
    return !choice.content.empty();
  }
  return false;
}

// Records certificates as they are parsed so a later failure keeps them.
void parse_signed_data(std::span<const std::uint8_t> blob, SignatureInfo& info) {
  const der::Node root = der::read_single(blob);
  const auto ci = der::children(der::expect(root, der::kSequence, "ContentInfo"));
  if (ci.size() < 2 || der::oid_string(ci[0]) != kSignedData) throw der::DerError("not SignedData");
  const auto wrapped = der::children(der::expect(ci[1], der::kContext0, "content"));
  if (wrapped.size() != 1) throw der::DerError("bad content wrapper");
  const auto sd = der::children(der::expect(wrapped[0], der::kSequence, "SignedData"));
  if (sd.size() < 4) throw der::DerError("short SignedData");

  std::size_t i = 3;
  if (i < sd.size() && sd[i].tag == der::kContext0) {
    for (const auto& cert : der::children(sd[i])) {
      if (cert.tag != der::kSequence) continue;
      info.certs.push_back(parse_certificate(cert));
    }
    ++i;
  }
  if (i < sd.size() && sd[i].tag == der::kContext1) ++i;  // crls
  if (i >= sd.size()) throw der::DerError("missing signerInfos");
  const auto signers = der::children(der::expect(sd[i], der::kSet, "signerInfos"));
  if (signers.empty()) return;

  const auto si = der::children(der::expect(signers[0], der::kSequence, "SignerInfo"));
  info.has_signer = true;
  for (const auto& part : si) {
    if (part.tag != der::kContext0 && part.tag != der::kContext1) continue;
    for (const auto& attr : der::children(part)) {
      const auto av = der::children(der::expect(attr, der::kSequence, "attribute"));
      if (av.size() != 2) throw der::DerError("bad attribute");
      const std::string oid = der::oid_string(av[0]);
      const auto values = der::children(der::expect(av[1], der::kSet, "attribute values"));
      if (part.tag == der::kContext0 && oid == kOpusInfo && !values.empty()) {
        info.has_program_name = program_name_present(values[0]);
      } else if (part.tag == der::kContext1 && (oid == kCountersignature || oid == kRfc3161Timestamp)) {
        info.has_countersigner = true;
      }
    }
  }
}

std::uint64_t chain_depth(const std::vector<Certificate>& certs) {
  const std::size_t n = certs.size();
  std::vector<std::vector<std::size_t>> parents(n);
  for (std::size_t c = 0; c < n; ++c) {
    if (certs[c].issuer == certs[c].subject) continue;
    for (std::size_t p = 0; p < n; ++p) {
      if (p != c && certs[p].subject == certs[c].issuer) parents[c].push_back(p);
    }
  }
  std::vector<std::uint64_t> memo(n, 0);
  std::vector<char> on_stack(n, 0);
  std::function<std::uint64_t(std::size_t)> depth = [&](std::size_t c) -> std::uint64_t {
    if (memo[c]) return memo[c];
    on_stack[c] = 1;
    std::uint64_t best = 0;
    for (std::size_t p : parents[c]) {
      if (!on_stack[p]) best = std::max(best, depth(p));
    }
    on_stack[c] = 0;
    return memo[c] = best + 1;
  };
  std::uint64_t best = 0;
  for (std::size_t c = 0; c < n; ++c) best = std::max(best, depth(c));
  return best;
}

}  // namespace

AuthenticodeSummary extract_authenticode(const ParsedImage& img, Warnings& w) {
  AuthenticodeSummary out;
  const auto& dir = img.directory(kDirSecurity);
  if (dir.virtual_address == 0 || dir.size == 0) return out;

  // The security directory holds a file offset, not an RVA.
  const ByteView file(img.content);
  const auto table = file.slice(dir.virtual_address, dir.size);
  if (table.size() < 8) {
    w.add(msg::certificate_invalid, "table too small");
    out.parse_error = 1;
    return out;
  }

  std::vector<SignatureInfo> signatures;
  const ByteView t(table);
  std::size_t off = 0;
  for (std::size_t n = 0; off + 8 <= table.size() && n < kMaxCertificateEntries; ++n) {
    const std::uint32_t length = t.u32(off);
    const std::uint16_t revision = t.u16(off + 4);
    const std::uint16_t type = t.u16(off + 6);
    if (length < 8 || length > table.size() - off) {
      w.add(msg::certificate_invalid, "bad dwLength " + std::to_string(length));
      out.parse_error = 1;
      break;
    }
    if (revision != 0x0200 && revision != 0x0100) {
      w.add(msg::certificate_revision, std::to_string(revision));
      out.parse_error = 1;
    } else if (type != 2) {
      w.add(msg::certificate_type, std::to_string(type));
    } else {
      SignatureInfo info;
      try {
        // DER blobs are commonly zero-padded to the 8-byte entry alignment.
        auto blob = table.subspan(off + 8, length - 8);
        auto front = blob;
        const der::Node whole = der::read(front);
        parse_signed_data(whole.whole, info);
      } catch (const der::DerError& e) {
        w.add(msg::authenticode_invalid, e.what());
        out.parse_error = 1;
      }
      signatures.push_back(std::move(info));
    }
    off += (static_cast<std::size_t>(length) + 7) & ~std::size_t{7};
  }

  std::vector<Certificate> all;
  for (const auto& s : signatures) all.insert(all.end(), s.certs.begin(), s.certs.end());
  out.num_certs = all.size();
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (all[i].issuer == all[i].subject) out.self_signed = 1;
    out.latest_signing_time = i == 0 ? all[i].not_before : std::max(out.latest_signing_time, all[i].not_before);
  }
  out.chain_max_depth = chain_depth(all);
  if (!signatures.empty() && signatures.front().has_signer) {
    out.empty_program_name = signatures.front().has_program_name ? 0 : 1;
    out.no_countersigner = signatures.front().has_countersigner ? 0 : 1;
  }
  if (out.num_certs > 0)
    out.signing_time_diff = out.latest_signing_time - static_cast<std::int64_t>(img.timestamp);
  return out;
}

}  // namespace ember::pe
