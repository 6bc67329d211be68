#include "ember/pipeline/calendar.hpp"

#include <charconv>
#include <cstdio>

namespace ember::pipeline {
namespace {

int read_int(std::string_view text, std::size_t pos, std::size_t len) {
  int v = 0;
  if (pos + len > text.size()) throw TimeError("timestamp too short: " + std::string(text));
  const auto* first = text.data() + pos;
  const auto [p, ec] = std::from_chars(first, first + len, v);
  if (ec != std::errc() || p != first + len) throw TimeError("bad digits in timestamp: " + std::string(text));
  return v;
}

void expect(std::string_view text, std::size_t pos, char c) {
  if (pos >= text.size() || text[pos] != c) throw TimeError("malformed timestamp: " + std::string(text));
}

}  // namespace

std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return static_cast<std::int64_t>(era) * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

std::int64_t parse_utc(std::string_view text) {
  if (!text.empty() && text.back() == 'Z') text.remove_suffix(1);
  const int y = read_int(text, 0, 4);
  expect(text, 4, '-');
  const int mo = read_int(text, 5, 2);
  expect(text, 7, '-');
  const int d = read_int(text, 8, 2);
  int h = 0, mi = 0, s = 0;
  if (text.size() > 10) {
    if (text[10] != 'T' && text[10] != ' ') throw TimeError("malformed timestamp: " + std::string(text));
    h = read_int(text, 11, 2);
    expect(text, 13, ':');
    mi = read_int(text, 14, 2);
    expect(text, 16, ':');
    s = read_int(text, 17, 2);
    if (text.size() != 19) throw TimeError("trailing characters in timestamp: " + std::string(text));
  }
  static constexpr int kMonthDays[] = {31, 29, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (mo < 1 || mo > 12 || d < 1 || d > kMonthDays[mo - 1] || h > 23 || mi > 59 || s > 60)
    throw TimeError("timestamp field out of range: " + std::string(text));
  return days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d)) * kDaySeconds + h * 3600 + mi * 60 + s;
}

std::string format_utc(std::int64_t t) {
  std::int64_t days = t / kDaySeconds;
  std::int64_t secs = t % kDaySeconds;
  if (secs < 0) secs += kDaySeconds, --days;
  const std::int64_t z = days + 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const auto doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp < 10 ? mp + 3 : mp - 9;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400 + (m <= 2);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ", static_cast<long long>(y), m, d,
                static_cast<long long>(secs / 3600), static_cast<long long>(secs / 60 % 60),
                static_cast<long long>(secs % 60));
  return buf;
}

WeekError::WeekError(std::int64_t t, std::int64_t start)
    : std::out_of_range("timestamp " + format_utc(t) + " is outside the collection window starting " +
                        format_utc(start)) {}

int week_of(std::int64_t t, std::int64_t collection_start) {
  if (t < collection_start || t >= collection_start + kCollectionWeeks * kWeekSeconds) throw WeekError(t, collection_start);
  return static_cast<int>((t - collection_start) / kWeekSeconds);
}

std::string_view split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::test: return "test";
    case Split::challenge: return "challenge";
  }
  return "train";
}

Split parse_split(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "test") return Split::test;
  if (s == "challenge") return Split::challenge;
  throw std::invalid_argument("unknown split: " + std::string(s));
}

Split split_for_week(int week) {
  if (week < 0 || week >= kCollectionWeeks) throw std::out_of_range("week index out of range: " + std::to_string(week));
  return week < kTrainWeeks ? Split::train : Split::test;
}

}  // namespace ember::pipeline
