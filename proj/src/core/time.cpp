#include "genco/time.hpp"

#include <charconv>
#include <cstdio>

#include "genco/error.hpp"

namespace genco {
namespace {

int digits(std::string_view s, std::size_t pos, std::size_t n, std::string_view whole) {
    int v = 0;
    if (pos + n > s.size()) throw ParseError("truncated timestamp '" + std::string(whole) + "'");
    auto [p, ec] = std::from_chars(s.data() + pos, s.data() + pos + n, v);
    if (ec != std::errc{} || p != s.data() + pos + n)
        throw ParseError("malformed timestamp '" + std::string(whole) + "'");
    return v;
}

void expect(std::string_view s, std::size_t pos, char c, std::string_view whole) {
    if (pos >= s.size() || s[pos] != c) throw ParseError("malformed timestamp '" + std::string(whole) + "'");
}

Day checked_day(int y, int m, int d, std::string_view whole) {
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                          std::chrono::day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) throw ParseError("invalid calendar date '" + std::string(whole) + "'");
    return Day{ymd};
}

}  // namespace

Day parse_day(std::string_view text) {
    if (text.size() != 10) throw ParseError("malformed date '" + std::string(text) + "'");
    const int y = digits(text, 0, 4, text);
    expect(text, 4, '-', text);
    const int m = digits(text, 5, 2, text);
    expect(text, 7, '-', text);
    const int d = digits(text, 8, 2, text);
    return checked_day(y, m, d, text);
}

HourStamp parse_hour(std::string_view text) {
    std::string_view s = text;
    if (!s.empty() && s.back() == 'Z') s.remove_suffix(1);
    if (s.size() != 16 && s.size() != 19) throw ParseError("malformed timestamp '" + std::string(text) + "'");
    const Day day = parse_day(s.substr(0, 10));
    if (s[10] != 'T' && s[10] != ' ') throw ParseError("malformed timestamp '" + std::string(text) + "'");
    const int h = digits(s, 11, 2, text);
    expect(s, 13, ':', text);
    const int mi = digits(s, 14, 2, text);
    int sec = 0;
    if (s.size() == 19) {
        expect(s, 16, ':', text);
        sec = digits(s, 17, 2, text);
    }
    if (h > 23 || mi != 0 || sec != 0)
        throw ParseError("timestamp is not on a whole hour '" + std::string(text) + "'");
    return HourStamp{day} + std::chrono::hours{h};
}

std::string format_day(Day d) {
    const std::chrono::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

std::string format_hour(HourStamp h) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "T%02d:00", hour_of_day(h));
    return format_day(day_of(h)) + buf;
}

int day_of_week(HourStamp h) {
    const std::chrono::weekday wd{day_of(h)};
    return static_cast<int>(wd.iso_encoding()) - 1;
}

int month_of(HourStamp h) {
    return static_cast<int>(static_cast<unsigned>(std::chrono::year_month_day{day_of(h)}.month()));
}

}  // namespace genco
