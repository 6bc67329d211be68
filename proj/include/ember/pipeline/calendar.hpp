#pragma once

// UTC timestamps and the 64-week collection calendar.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ember::pipeline {

inline constexpr std::int64_t kDaySeconds = 86400;
inline constexpr std::int64_t kWeekSeconds = 7 * kDaySeconds;
inline constexpr int kCollectionWeeks = 64;
inline constexpr int kTrainWeeks = 52;

class TimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// "YYYY-MM-DD", "YYYY-MM-DDTHH:MM:SS" or either with a trailing "Z"; always UTC.
std::int64_t parse_utc(std::string_view text);
std::string format_utc(std::int64_t t);

std::int64_t days_from_civil(int y, unsigned m, unsigned d);

// 2023-09-24T00:00:00Z.
inline constexpr std::int64_t kDefaultCollectionStart = 1695513600;

class WeekError : public std::out_of_range {
 public:
  WeekError(std::int64_t t, std::int64_t start);
};

int week_of(std::int64_t t, std::int64_t collection_start = kDefaultCollectionStart);

enum class Split { train, test, challenge };

std::string_view split_name(Split s);
Split parse_split(std::string_view s);
// train for weeks [0, 52), test for [52, 64).
Split split_for_week(int week);

}  // namespace ember::pipeline
