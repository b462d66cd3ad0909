#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace revmetrics {

using Date = std::chrono::year_month_day;
using Timestamp = std::chrono::sys_seconds;

/// Accepts "YYYY-MM-DD", optionally followed by a time part ("T..." or " ..."),
/// which is ignored. Returns nullopt for anything else, including invalid days.
std::optional<Date> parse_date(std::string_view text);
std::string format_date(const Date &date);

/// "YYYY-MM-DDTHH:MM:SSZ" in both directions.
std::optional<Timestamp> parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp ts);

Date date_of(Timestamp ts);
Timestamp start_of(const Date &date);
Timestamp now_utc();

/// Completed calendar months from `from` to `to`; negative when `to` precedes `from`.
int whole_months_between(const Date &from, const Date &to);

/// Month ordinal (year*12 + month-1) used for bucketing.
int month_index(const Date &date);

Date add_days(const Date &date, int days);

} // namespace revmetrics
