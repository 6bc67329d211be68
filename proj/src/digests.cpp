#include "ember/digests.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <memory>
#include <stdexcept>

namespace ember {
namespace {

struct CtxDeleter {
  void operator()(EVP_MD_CTX* ctx) const { EVP_MD_CTX_free(ctx); }
};
using CtxPtr = std::unique_ptr<EVP_MD_CTX, CtxDeleter>;

CtxPtr make_ctx(const EVP_MD* md) {
  CtxPtr ctx(EVP_MD_CTX_new());
  if (!ctx || EVP_DigestInit_ex(ctx.get(), md, nullptr) != 1) throw std::runtime_error("EVP_DigestInit_ex failed");
  return ctx;
}

std::string finish(EVP_MD_CTX* ctx) {
  std::array<std::uint8_t, EVP_MAX_MD_SIZE> out{};
  unsigned int len = 0;
  if (EVP_DigestFinal_ex(ctx, out.data(), &len) != 1) throw std::runtime_error("EVP_DigestFinal_ex failed");
  return to_hex_lower(std::span<const std::uint8_t>(out.data(), len));
}

}  // namespace

std::string to_hex_lower(std::span<const std::uint8_t> bytes) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s;
  s.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    s.push_back(digits[b >> 4]);
    s.push_back(digits[b & 0x0F]);
  }
  return s;
}

FileDigests compute_digests(std::span<const std::uint8_t> content) {
  auto md5 = make_ctx(EVP_md5());
  auto sha1 = make_ctx(EVP_sha1());
  auto sha256 = make_ctx(EVP_sha256());
  constexpr std::size_t chunk = 1 << 20;
  for (std::size_t off = 0; off < content.size(); off += chunk) {
    const std::size_t n = std::min(chunk, content.size() - off);
    const auto* p = content.data() + off;
    if (EVP_DigestUpdate(md5.get(), p, n) != 1 || EVP_DigestUpdate(sha1.get(), p, n) != 1 ||
        EVP_DigestUpdate(sha256.get(), p, n) != 1) {
      throw std::runtime_error("EVP_DigestUpdate failed");
    }
  }
  return FileDigests{finish(md5.get()), finish(sha1.get()), finish(sha256.get())};
}

}  // namespace ember
