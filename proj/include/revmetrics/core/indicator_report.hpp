#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "revmetrics/calendar.hpp"

namespace revmetrics::core {

/// All indicator values computed for one paper. A value is absent when the
/// indicator was not requested or could not be computed; `errors` then holds
/// the reason.
struct IndicatorReport {
    std::optional<double> tncsi;
    std::optional<double> iei_avg;
    std::optional<double> iei_weighted;
    std::optional<double> iei_instant;
    std::optional<double> arq;
    std::optional<std::int64_t> s_mp;
    std::optional<double> rqm;
    std::optional<double> cdr;
    std::optional<double> rad;
    std::optional<double> rui;

    std::string topic_keyword;
    std::int64_t sample_size = 0;
    double beta = 0.0;
    Timestamp computed_at{};
    std::vector<std::string> warnings;
    std::vector<std::string> errors;
};

nlohmann::json to_json(const IndicatorReport &report);
/// Throws ParseError on missing or mistyped fields.
IndicatorReport report_from_json(const nlohmann::json &json);

} // namespace revmetrics::core
