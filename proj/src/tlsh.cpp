#include "ember/tlsh.hpp"

#include <algorithm>

#include "ember/simd/kernels.hpp"

namespace ember::tlsh {
namespace {

// Pearson permutation used by the bucket mapping.
constexpr std::uint8_t kPearson[256] = {
    1, 87, 49, 12, 176, 178, 102, 166, 121, 193, 6, 84, 249, 230, 44, 163,
    14, 197, 213, 181, 161, 85, 218, 80, 64, 239, 24, 226, 236, 142, 38, 200,
    110, 177, 104, 103, 141, 253, 255, 50, 77, 101, 81, 18, 45, 96, 31, 222,
    25, 107, 190, 70, 86, 237, 240, 34, 72, 242, 20, 214, 244, 227, 149, 235,
    97, 234, 57, 22, 60, 250, 82, 175, 208, 5, 127, 199, 111, 62, 135, 248,
    174, 169, 211, 58, 66, 154, 106, 195, 245, 171, 17, 187, 182, 179, 0, 243,
    132, 56, 148, 75, 128, 133, 158, 100, 130, 126, 91, 13, 153, 246, 216, 219,
    119, 68, 223, 78, 83, 88, 201, 99, 122, 11, 92, 32, 136, 114, 52, 10,
    138, 30, 48, 183, 156, 35, 61, 26, 143, 74, 251, 94, 129, 162, 63, 152,
    170, 7, 115, 167, 241, 206, 3, 150, 55, 59, 151, 220, 90, 53, 23, 131,
    125, 173, 15, 238, 79, 95, 89, 16, 105, 137, 225, 224, 217, 160, 37, 123,
    118, 73, 2, 157, 46, 116, 9, 145, 134, 228, 207, 212, 202, 215, 69, 229,
    27, 188, 67, 124, 168, 252, 42, 4, 29, 108, 21, 247, 19, 205, 39, 203,
    233, 40, 186, 147, 198, 192, 155, 33, 164, 191, 98, 204, 165, 180, 117, 76,
    140, 36, 210, 172, 41, 54, 159, 8, 185, 232, 113, 196, 231, 47, 146, 120,
    51, 65, 28, 144, 254, 221, 93, 189, 194, 139, 112, 43, 71, 109, 184, 209
};

// Upper bounds of the logarithmic length buckets.
constexpr std::uint32_t kLengthBounds[170] = {
    1, 2, 3, 5, 7, 11, 17, 25, 38, 57,
    86, 129, 194, 291, 437, 656, 854, 1110, 1443, 1876,
    2439, 3171, 3475, 3823, 4205, 4626, 5088, 5597, 6157, 6772,
    7450, 8195, 9014, 9916, 10907, 11998, 13198, 14518, 15970, 17567,
    19323, 21256, 23382, 25720, 28292, 31121, 34233, 37656, 41422, 45564,
    50121, 55133, 60646, 66711, 73382, 80721, 88793, 97672, 107439, 118183,
    130002, 143002, 157302, 173032, 190335, 209369, 230306, 253337, 278670, 306538,
    337191, 370911, 408002, 448802, 493682, 543050, 597356, 657091, 722800, 795081,
    874589, 962048, 1058252, 1164078, 1280486, 1408534, 1549388, 1704327, 1874759, 2062236,
    2268459, 2495305, 2744836, 3019320, 3321252, 3653374, 4018711, 4420582, 4862641, 5348905,
    5883796, 6472176, 7119394, 7831333, 8614467, 9475909, 10423501, 11465851, 12612437, 13873681,
    15261050, 16787154, 18465870, 20312458, 22343706, 24578077, 27035886, 29739474, 32713425, 35984770,
    39583245, 43541573, 47895730, 52685306, 57953837, 63749221, 70124148, 77136564, 84850228, 93335252,
    102668779, 112935659, 124229227, 136652151, 150317384, 165349128, 181884040, 200072456, 220079703, 242087671,
    266296456, 292926096, 322218735, 354440623, 389884688, 428873168, 471760495, 518936559, 570830240, 627913311,
    690704607, 759775136, 835752671, 919327967, 1011260767, 1112386880, 1223623232, 1345985727, 1480584256, 1628642751,
    1791507135, 1970657856, 2167723648, 2384496256, 2622945920, 2885240448, 3173764736, 3491141248, 3840255616, 4224281216
};

constexpr std::size_t kEffectiveBuckets = 128;

inline std::uint8_t mix(std::uint8_t salt, std::uint8_t a, std::uint8_t b, std::uint8_t c) {
  return kPearson[kPearson[kPearson[salt ^ a] ^ b] ^ c];
}

inline std::uint8_t swap_nibbles(std::uint8_t b) { return static_cast<std::uint8_t>((b >> 4) | (b << 4)); }

int mod_diff(int x, int y, int range) {
  const int d = x > y ? x - y : y - x;
  return std::min(d, range - d);
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  return -1;
}

}  // namespace

std::uint8_t length_code(std::uint64_t length) {
  const auto* end = std::end(kLengthBounds);
  const auto* it = std::lower_bound(std::begin(kLengthBounds), end, length);
  if (it == end) return 169;
  return static_cast<std::uint8_t>(it - std::begin(kLengthBounds));
}

void Hasher::update(std::span<const std::uint8_t> data) {
  for (const std::uint8_t byte : data) {
    const std::size_t j = length_ % 5;
    window_[j] = byte;
    if (length_ >= 4) {
      const std::uint8_t w0 = byte;
      const std::uint8_t w1 = window_[(j + 4) % 5];
      const std::uint8_t w2 = window_[(j + 3) % 5];
      const std::uint8_t w3 = window_[(j + 2) % 5];
      const std::uint8_t w4 = window_[(j + 1) % 5];
      checksum_ = mix(1, w0, w1, checksum_);
      ++buckets_[mix(49, w0, w1, w2)];
      ++buckets_[mix(12, w0, w1, w3)];
      ++buckets_[mix(178, w0, w2, w3)];
      ++buckets_[mix(166, w0, w2, w4)];
      ++buckets_[mix(84, w0, w1, w4)];
      ++buckets_[mix(230, w0, w3, w4)];
    }
    ++length_;
  }
}

std::optional<Digest> Hasher::finish() const {
  if (length_ < kMinLength) return std::nullopt;

  std::array<std::uint32_t, kEffectiveBuckets> sorted;
  std::copy_n(buckets_.begin(), kEffectiveBuckets, sorted.begin());
  std::sort(sorted.begin(), sorted.end());
  const std::uint32_t q1 = sorted[kEffectiveBuckets / 4 - 1];
  const std::uint32_t q2 = sorted[kEffectiveBuckets / 2 - 1];
  const std::uint32_t q3 = sorted[kEffectiveBuckets - kEffectiveBuckets / 4 - 1];
  if (q3 == 0) return std::nullopt;

  const auto nonzero = std::count_if(buckets_.begin(), buckets_.begin() + kEffectiveBuckets,
                                     [](std::uint32_t c) { return c > 0; });
  if (nonzero <= static_cast<long>(kEffectiveBuckets / 2)) return std::nullopt;

  Digest d;
  for (std::size_t i = 0; i < kBodyBytes; ++i) {
    std::uint8_t h = 0;
    for (unsigned k = 0; k < 4; ++k) {
      const std::uint32_t c = buckets_[4 * i + k];
      const std::uint8_t code = c > q3 ? 3 : c > q2 ? 2 : c > q1 ? 1 : 0;
      h = static_cast<std::uint8_t>(h | (code << (2 * k)));
    }
    d.body[i] = h;
  }
  d.checksum = checksum_;
  d.lvalue = length_code(length_);
  d.q1ratio = static_cast<std::uint8_t>((static_cast<std::uint64_t>(q1) * 100 / q3) % 16);
  d.q2ratio = static_cast<std::uint8_t>((static_cast<std::uint64_t>(q2) * 100 / q3) % 16);
  return d;
}

std::string Digest::to_string() const {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out = "T1";
  out.reserve(kTextLength);
  auto put = [&](std::uint8_t b) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 0xF]);
  };
  put(swap_nibbles(checksum));
  put(swap_nibbles(lvalue));
  put(static_cast<std::uint8_t>((q1ratio << 4) | (q2ratio & 0xF)));
  for (std::size_t i = 0; i < kBodyBytes; ++i) put(body[kBodyBytes - 1 - i]);
  return out;
}

std::optional<Digest> Digest::parse(std::string_view text) {
  if (text.size() == kTextLength && text.substr(0, 2) == "T1") {
    text.remove_prefix(2);
  } else if (text.size() != kTextLength - 2) {
    return std::nullopt;
  }
  std::array<std::uint8_t, 35> bytes{};
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    const int hi = hex_value(text[2 * i]);
    const int lo = hex_value(text[2 * i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    bytes[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  Digest d;
  d.checksum = swap_nibbles(bytes[0]);
  d.lvalue = swap_nibbles(bytes[1]);
  d.q1ratio = bytes[2] >> 4;
  d.q2ratio = bytes[2] & 0xF;
  for (std::size_t i = 0; i < kBodyBytes; ++i) d.body[i] = bytes[3 + kBodyBytes - 1 - i];
  return d;
}

std::optional<Digest> digest(std::span<const std::uint8_t> content) {
  Hasher h;
  h.update(content);
  return h.finish();
}

std::optional<std::string> digest_text(std::span<const std::uint8_t> content) {
  auto d = digest(content);
  if (!d) return std::nullopt;
  return d->to_string();
}

int header_distance(const Digest& a, const Digest& b, bool include_length) {
  int diff = 0;
  if (include_length) {
    const int ld = mod_diff(a.lvalue, b.lvalue, 256);
    diff += ld <= 1 ? ld : ld * 12;
  }
  const int q1 = mod_diff(a.q1ratio, b.q1ratio, 16);
  diff += q1 <= 1 ? q1 : (q1 - 1) * 12;
  const int q2 = mod_diff(a.q2ratio, b.q2ratio, 16);
  diff += q2 <= 1 ? q2 : (q2 - 1) * 12;
  if (a.checksum != b.checksum) ++diff;
  return diff;
}

int distance(const Digest& a, const Digest& b, bool include_length) {
  return header_distance(a, b, include_length) +
         static_cast<int>(simd::kernels().tlsh_body_distance(a.body.data(), b.body.data()));
}

int distance(const std::optional<Digest>& a, const std::optional<Digest>& b) {
  if (!a || !b) throw TlshError("distance: digest is null");
  return distance(*a, *b);
}

bool is_near_duplicate(const std::optional<Digest>& a, const std::optional<Digest>& b, int threshold) {
  if (threshold < 0) throw std::invalid_argument("is_near_duplicate: threshold must be >= 0");
  if (!a || !b) return false;
  return distance(*a, *b) <= threshold;
}

}  // namespace ember::tlsh
