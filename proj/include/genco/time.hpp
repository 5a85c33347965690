#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace genco {

/// An hour on the UTC-like wall clock used by all market data.
using HourStamp = std::chrono::sys_time<std::chrono::hours>;
using Day = std::chrono::sys_days;

/// Parses `YYYY-MM-DDTHH:00` (optionally `:00` seconds and a trailing `Z`).
/// Throws ParseError on anything else, including non-zero minutes.
HourStamp parse_hour(std::string_view text);
Day parse_day(std::string_view text);

std::string format_hour(HourStamp h);
std::string format_day(Day d);

inline Day day_of(HourStamp h) { return std::chrono::floor<std::chrono::days>(h); }
inline int hour_of_day(HourStamp h) { return static_cast<int>((h - day_of(h)).count()); }
/// 0 = Monday ... 6 = Sunday.
int day_of_week(HourStamp h);
/// 1..12
int month_of(HourStamp h);

}  // namespace genco
