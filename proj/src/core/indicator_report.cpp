#include "revmetrics/core/indicator_report.hpp"

#include "revmetrics/error.hpp"

namespace revmetrics::core {

namespace {

template <typename T>
void put_optional(nlohmann::json &out, const char *key, const std::optional<T> &value) {
    if (value)
        out[key] = *value;
    else
        out[key] = nullptr;
}

template <typename T>
std::optional<T> get_optional(const nlohmann::json &in, const char *key) {
    const auto it = in.find(key);
    if (it == in.end() || it->is_null())
        return std::nullopt;
    return it->get<T>();
}

} // namespace

nlohmann::json to_json(const IndicatorReport &report) {
    nlohmann::json out = nlohmann::json::object();
    put_optional(out, "tncsi", report.tncsi);
    put_optional(out, "iei_avg", report.iei_avg);
    put_optional(out, "iei_weighted", report.iei_weighted);
    put_optional(out, "iei_instant", report.iei_instant);
    put_optional(out, "arq", report.arq);
    put_optional(out, "s_mp", report.s_mp);
    put_optional(out, "rqm", report.rqm);
    put_optional(out, "cdr", report.cdr);
    put_optional(out, "rad", report.rad);
    put_optional(out, "rui", report.rui);
    out["topic_keyword"] = report.topic_keyword;
    out["sample_size"] = report.sample_size;
    out["beta"] = report.beta;
    out["computed_at"] = format_timestamp(report.computed_at);
    out["warnings"] = report.warnings;
    out["errors"] = report.errors;
    return out;
}

IndicatorReport report_from_json(const nlohmann::json &json) {
    try {
        IndicatorReport report;
        report.tncsi = get_optional<double>(json, "tncsi");
        report.iei_avg = get_optional<double>(json, "iei_avg");
        report.iei_weighted = get_optional<double>(json, "iei_weighted");
        report.iei_instant = get_optional<double>(json, "iei_instant");
        report.arq = get_optional<double>(json, "arq");
        report.s_mp = get_optional<std::int64_t>(json, "s_mp");
        report.rqm = get_optional<double>(json, "rqm");
        report.cdr = get_optional<double>(json, "cdr");
        report.rad = get_optional<double>(json, "rad");
        report.rui = get_optional<double>(json, "rui");
        report.topic_keyword = json.at("topic_keyword").get<std::string>();
        report.sample_size = json.at("sample_size").get<std::int64_t>();
        report.beta = json.value("beta", 0.0);
        const auto ts = parse_timestamp(json.at("computed_at").get<std::string>());
        if (!ts)
            throw Error(ErrorKind::ParseError, "bad computed_at timestamp");
        report.computed_at = *ts;
        report.warnings = json.value("warnings", std::vector<std::string>{});
        report.errors = json.value("errors", std::vector<std::string>{});
        return report;
    } catch (const nlohmann::json::exception &e) {
        throw Error(ErrorKind::ParseError, std::string("indicator report: ") + e.what());
    }
}

} // namespace revmetrics::core
