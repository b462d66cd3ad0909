#include <doctest.h>

#include "revmetrics/calendar.hpp"
#include "revmetrics/core/indicator_report.hpp"

using namespace revmetrics;
using namespace std::chrono;

TEST_CASE("dates parse and format") {
    const auto d = parse_date("2024-02-29");
    REQUIRE(d);
    CHECK(format_date(*d) == "2024-02-29");
    CHECK(parse_date("2023-02-29") == std::nullopt);
    CHECK(parse_date("2023-1-05") == std::nullopt);
    CHECK(parse_date("") == std::nullopt);
    CHECK(parse_date("2023-01-05T18:00:00Z") == Date{2023y / January / 5});
    CHECK(parse_date("2023-01-05x") == std::nullopt);
}

TEST_CASE("timestamps round trip") {
    const auto ts = parse_timestamp("2024-10-01T12:34:56Z");
    REQUIRE(ts);
    CHECK(format_timestamp(*ts) == "2024-10-01T12:34:56Z");
    CHECK(format_timestamp(*parse_timestamp("2024-10-01")) == "2024-10-01T00:00:00Z");
    CHECK(date_of(*ts) == Date{2024y / October / 1});
}

TEST_CASE("whole months between dates") {
    CHECK(whole_months_between(Date{2020y / January / 15}, Date{2020y / July / 15}) == 6);
    CHECK(whole_months_between(Date{2020y / January / 15}, Date{2020y / July / 14}) == 5);
    CHECK(whole_months_between(Date{2020y / January / 1}, Date{2020y / January / 31}) == 0);
    CHECK(whole_months_between(Date{2021y / March / 1}, Date{2020y / March / 1}) == -12);
    CHECK(add_days(Date{2024y / March / 1}, -1) == Date{2024y / February / 29});
}

TEST_CASE("indicator report json round trip") {
    core::IndicatorReport r;
    r.tncsi = 0.5;
    r.s_mp = 3;
    r.topic_keyword = "object detection";
    r.sample_size = 1000;
    r.beta = 5.0;
    r.computed_at = *parse_timestamp("2024-10-01T00:00:00Z");
    r.warnings = {"w"};
    const auto json = core::to_json(r);
    const auto back = core::report_from_json(json);
    CHECK(core::to_json(back).dump() == json.dump());
    CHECK_FALSE(back.rqm.has_value());
    CHECK(*back.s_mp == 3);
}
