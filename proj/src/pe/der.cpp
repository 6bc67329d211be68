#include "der.hpp"

namespace ember::pe::der {
namespace {

std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

int digits(std::span<const std::uint8_t> s, std::size_t pos, std::size_t n) {
  int v = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    if (s[i] < '0' || s[i] > '9') throw DerError("malformed time value");
    v = v * 10 + (s[i] - '0');
  }
  return v;
}

}  // namespace

Node read(std::span<const std::uint8_t>& in) {
  if (in.size() < 2) throw DerError("truncated element header");
  Node n;
  n.tag = in[0];
  if ((n.tag & 0x1F) == 0x1F) throw DerError("high tag numbers are not supported");
  std::size_t pos = 2;
  std::uint64_t len = in[1];
  if (len == 0x80) throw DerError("indefinite length");
  if (len > 0x80) {
    const std::size_t octets = len & 0x7F;
    if (octets > 4 || in.size() < 2 + octets) throw DerError("bad length encoding");
    len = 0;
    for (std::size_t i = 0; i < octets; ++i) len = (len << 8) | in[2 + i];
    pos += octets;
  }
  if (len > in.size() - pos) throw DerError("element runs past its container");
  n.content = in.subspan(pos, static_cast<std::size_t>(len));
  n.whole = in.first(pos + static_cast<std::size_t>(len));
  in = in.subspan(pos + static_cast<std::size_t>(len));
  return n;
}

Node read_single(std::span<const std::uint8_t> in) {
  Node n = read(in);
  if (!in.empty()) throw DerError("trailing bytes after element");
  return n;
}

std::vector<Node> children(const Node& n) {
  if (!n.constructed()) throw DerError("primitive element has no children");
  std::vector<Node> out;
  auto rest = n.content;
  while (!rest.empty()) {
    out.push_back(read(rest));
    if (out.size() > 100000) throw DerError("too many elements");
  }
  return out;
}

const Node& expect(const Node& n, std::uint8_t tag, const char* what) {
  if (n.tag != tag) throw DerError(std::string("unexpected tag for ") + what);
  return n;
}

std::string oid_string(const Node& n) {
  expect(n, kOid, "object identifier");
  if (n.content.empty()) throw DerError("empty object identifier");
  std::string out;
  std::uint64_t value = 0;
  bool first = true;
  for (std::size_t i = 0; i < n.content.size(); ++i) {
    const std::uint8_t b = n.content[i];
    if (value > (UINT64_MAX >> 7)) throw DerError("object identifier arc too large");
    value = (value << 7) | (b & 0x7F);
    if (b & 0x80) {
      if (i + 1 == n.content.size()) throw DerError("truncated object identifier");
      continue;
    }
    if (first) {
      const std::uint64_t a = value < 80 ? value / 40 : 2;
      out = std::to_string(a) + "." + std::to_string(value - a * 40);
      first = false;
    } else {
      out += "." + std::to_string(value);
    }
    value = 0;
  }
  return out;
}

std::int64_t time_value(const Node& n) {
  const auto s = n.content;
  int year = 0;
  std::size_t pos = 0;
  if (n.tag == kUtcTime) {
    if (s.size() < 11) throw DerError("short UTCTime");
    year = digits(s, 0, 2);
    year += year < 50 ? 2000 : 1900;
    pos = 2;
  } else if (n.tag == kGeneralizedTime) {
    if (s.size() < 13) throw DerError("short GeneralizedTime");
    year = digits(s, 0, 4);
    pos = 4;
  } else {
    throw DerError("not a time value");
  }
  const int month = digits(s, pos, 2);
  const int day = digits(s, pos + 2, 2);
  const int hour = digits(s, pos + 4, 2);
  const int minute = digits(s, pos + 6, 2);
  int second = 0;
  if (s.size() >= pos + 10 && s[pos + 8] >= '0' && s[pos + 8] <= '9') second = digits(s, pos + 8, 2);
  if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 || second > 60)
    throw DerError("time value out of range");
  return days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day)) * 86400 + hour * 3600 +
         minute * 60 + second;
}

}  // namespace ember::pe::der
