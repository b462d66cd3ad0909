#include "revmetrics/calendar.hpp"

#include <charconv>
#include <cstdio>

namespace revmetrics {

namespace {

bool parse_uint(std::string_view text, unsigned &out) {
    if (text.empty())
        return false;
    for (char c : text)
        if (c < '0' || c > '9')
            return false;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc() && ptr == text.data() + text.size();
}

} // namespace

std::optional<Date> parse_date(std::string_view text) {
    if (text.size() < 10 || text[4] != '-' || text[7] != '-')
        return std::nullopt;
    if (text.size() > 10 && text[10] != 'T' && text[10] != ' ')
        return std::nullopt;
    unsigned y = 0, m = 0, d = 0;
    if (!parse_uint(text.substr(0, 4), y) || !parse_uint(text.substr(5, 2), m) || !parse_uint(text.substr(8, 2), d))
        return std::nullopt;
    Date date{std::chrono::year{static_cast<int>(y)}, std::chrono::month{m}, std::chrono::day{d}};
    if (!date.ok())
        return std::nullopt;
    return date;
}

std::string format_date(const Date &date) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()), static_cast<unsigned>(date.month()),
                  static_cast<unsigned>(date.day()));
    return buf;
}

std::optional<Timestamp> parse_timestamp(std::string_view text) {
    auto date = parse_date(text);
    if (!date)
        return std::nullopt;
    Timestamp ts = start_of(*date);
    if (text.size() == 10)
        return ts;
    if (text.size() < 19 || text[13] != ':' || text[16] != ':')
        return std::nullopt;
    unsigned hh = 0, mm = 0, ss = 0;
    if (!parse_uint(text.substr(11, 2), hh) || !parse_uint(text.substr(14, 2), mm) ||
        !parse_uint(text.substr(17, 2), ss) || hh > 23 || mm > 59 || ss > 60)
        return std::nullopt;
    return ts + std::chrono::hours{hh} + std::chrono::minutes{mm} + std::chrono::seconds{ss};
}

std::string format_timestamp(Timestamp ts) {
    const auto day_point = std::chrono::floor<std::chrono::days>(ts);
    const std::chrono::hh_mm_ss hms{ts - day_point};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%sT%02ld:%02ld:%02ldZ", format_date(Date{day_point}).c_str(),
                  static_cast<long>(hms.hours().count()), static_cast<long>(hms.minutes().count()),
                  static_cast<long>(hms.seconds().count()));
    return buf;
}

Date date_of(Timestamp ts) { return Date{std::chrono::floor<std::chrono::days>(ts)}; }

Timestamp start_of(const Date &date) { return std::chrono::sys_days{date}; }

Timestamp now_utc() { return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()); }

int whole_months_between(const Date &from, const Date &to) {
    int months = month_index(to) - month_index(from);
    if (months > 0 && to.day() < from.day())
        --months;
    else if (months < 0 && to.day() > from.day())
        ++months;
    return months;
}

int month_index(const Date &date) {
    return static_cast<int>(date.year()) * 12 + static_cast<int>(static_cast<unsigned>(date.month())) - 1;
}

Date add_days(const Date &date, int days) { return Date{std::chrono::sys_days{date} + std::chrono::days{days}}; }

} // namespace revmetrics
