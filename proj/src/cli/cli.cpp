#include "revmetrics/cli/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "revmetrics/analysis/analysis.hpp"
#include "revmetrics/cli/pipeline.hpp"
#include "revmetrics/error.hpp"
#include "revmetrics/extraction/extraction.hpp"
#include "revmetrics/retrieval/arxiv.hpp"
#include "revmetrics/retrieval/parallel.hpp"

namespace revmetrics::cli {

namespace {

using nlohmann::json;

struct UsageError {
    std::string message;
};

std::string trim(const std::string &text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos)
        return {};
    const auto last = text.find_last_not_of(" \t\r\n");
    return text.substr(first, last - first + 1);
}

std::string read_text_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorKind::InvalidArgument, "cannot read " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

double to_double(const std::string &key, const std::string &value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used == value.size())
            return v;
    } catch (const std::exception &) {
    }
    throw UsageError{key + " expects a number, got '" + value + "'"};
}

// Resolved settings: flags > env > config file > defaults.
struct Settings {
    std::string snapshot;
    std::string s2_api_key;
    std::string s2_base_url = retrieval::SemanticScholarClient::kDefaultBaseUrl;
    std::string arxiv_base_url = retrieval::ArxivClient::kDefaultBaseUrl;
    std::string llm_api_key;
    std::string llm_base_url;
    std::string llm_model = "gpt-3.5-turbo-0125";
    std::string llm_stub;
    std::string fixtures;
    std::string format = "table";
    bool offline = false;
    bool read_only = false;
    double requests_per_second = 1.0;
    std::size_t workers = retrieval::kDefaultWorkers;
    std::int64_t topic_sample_size = kDefaultTopicSampleSize;
    double beta = core::kDefaultBeta;
    int iei_window_months = kDefaultIeiWindowMonths;
    Date today{};
    Timestamp now{};
};

bool parse_bool(const std::string &key, const std::string &value) {
    if (value == "true" || value == "1" || value == "yes")
        return true;
    if (value == "false" || value == "0" || value == "no")
        return false;
    throw UsageError{key + " expects true or false, got '" + value + "'"};
}

void apply_setting(Settings &s, const std::string &key, const std::string &value) {
    if (key == "snapshot")
        s.snapshot = value;
    else if (key == "s2_api_key")
        s.s2_api_key = value;
    else if (key == "s2_base_url")
        s.s2_base_url = value;
    else if (key == "arxiv_base_url")
        s.arxiv_base_url = value;
    else if (key == "llm_api_key")
        s.llm_api_key = value;
    else if (key == "llm_base_url")
        s.llm_base_url = value;
    else if (key == "llm_model")
        s.llm_model = value;
    else if (key == "llm_stub")
        s.llm_stub = value;
    else if (key == "fixtures")
        s.fixtures = value;
    else if (key == "format") {
        if (value != "table" && value != "csv" && value != "json")
            throw UsageError{"format must be table, csv or json"};
        s.format = value;
    } else if (key == "offline")
        s.offline = parse_bool(key, value);
    else if (key == "read_only")
        s.read_only = parse_bool(key, value);
    else if (key == "requests_per_second") {
        s.requests_per_second = to_double(key, value);
        if (!(s.requests_per_second >= 0))
            throw UsageError{"requests_per_second must be non-negative"};
    } else if (key == "workers") {
        const double w = to_double(key, value);
        if (w < 1 || w != static_cast<double>(static_cast<std::size_t>(w)))
            throw UsageError{"workers must be a positive integer"};
        s.workers = static_cast<std::size_t>(w);
    } else if (key == "topic_sample_size") {
        const double k = to_double(key, value);
        if (k < 1 || k != static_cast<double>(static_cast<std::int64_t>(k)))
            throw UsageError{"topic_sample_size must be a positive integer"};
        s.topic_sample_size = static_cast<std::int64_t>(k);
    } else if (key == "beta") {
        s.beta = to_double(key, value);
        if (!(s.beta > 0))
            throw UsageError{"beta must be positive"};
    } else if (key == "iei_window_months") {
        const double w = to_double(key, value);
        if (w < 2 || w != static_cast<double>(static_cast<int>(w)))
            throw UsageError{"iei_window_months must be an integer >= 2"};
        s.iei_window_months = static_cast<int>(w);
    } else
        throw UsageError{"unknown setting '" + key + "'"};
}

// ---- output ---------------------------------------------------------------

struct Table {
    std::vector<std::string> headers;
    std::vector<std::vector<json>> rows;
};

std::string cell_text(const json &cell) {
    if (cell.is_null())
        return "-";
    if (cell.is_number_float()) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.4f", cell.get<double>());
        return buf;
    }
    if (cell.is_number())
        return cell.dump();
    if (cell.is_string())
        return cell.get<std::string>();
    return cell.dump();
}

std::size_t display_width(const std::string &text) {
    return static_cast<std::size_t>(
        std::count_if(text.begin(), text.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

std::string csv_field(const std::string &text) {
    if (text.find_first_of(",\"\n") == std::string::npos)
        return text;
    std::string out = "\"";
    for (const char c : text)
        out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}

void print_table(std::ostream &out, const Table &table, const std::string &format) {
    if (format == "json") {
        json rows = json::array();
        for (const auto &row : table.rows) {
            json object = json::object();
            for (std::size_t i = 0; i < table.headers.size(); ++i)
                object[table.headers[i]] = row[i];
            rows.push_back(std::move(object));
        }
        out << rows.dump(2) << '\n';
        return;
    }
    std::vector<std::vector<std::string>> text;
    for (const auto &row : table.rows) {
        text.emplace_back();
        for (const auto &cell : row)
            text.back().push_back(cell_text(cell));
    }
    if (format == "csv") {
        for (std::size_t i = 0; i < table.headers.size(); ++i)
            out << (i ? "," : "") << csv_field(table.headers[i]);
        out << '\n';
        for (const auto &row : text) {
            for (std::size_t i = 0; i < row.size(); ++i)
                out << (i ? "," : "") << csv_field(row[i]);
            out << '\n';
        }
        return;
    }
    std::vector<std::size_t> widths;
    for (const auto &h : table.headers)
        widths.push_back(display_width(h));
    for (const auto &row : text)
        for (std::size_t i = 0; i < row.size(); ++i)
            widths[i] = std::max(widths[i], display_width(row[i]));
    const auto emit = [&](const std::vector<std::string> &cells, const std::vector<json> *source) {
        std::string line;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const std::size_t pad = widths[i] - display_width(cells[i]);
            const bool right = source && (*source)[i].is_number();
            if (i)
                line += "  ";
            line += right ? std::string(pad, ' ') + cells[i] : cells[i] + std::string(pad, ' ');
        }
        while (!line.empty() && line.back() == ' ')
            line.pop_back();
        out << line << '\n';
    };
    emit(table.headers, nullptr);
    std::vector<std::string> rule;
    for (const auto w : widths)
        rule.emplace_back(w, '-');
    emit(rule, nullptr);
    for (std::size_t r = 0; r < text.size(); ++r)
        emit(text[r], &table.rows[r]);
}

json opt(const std::optional<double> &v) { return v ? json(*v) : json(nullptr); }
json opt(const std::optional<std::int64_t> &v) { return v ? json(*v) : json(nullptr); }

// ---- runtime --------------------------------------------------------------

/// Serializes calls into a client that is not thread-safe.
class SerializedLlm : public retrieval::LlmClient {
public:
    explicit SerializedLlm(std::shared_ptr<retrieval::LlmClient> inner) : inner_(std::move(inner)) {}
    std::string complete(const retrieval::ChatRequest &request) override {
        std::lock_guard lock(mutex_);
        return inner_->complete(request);
    }

private:
    std::shared_ptr<retrieval::LlmClient> inner_;
    std::mutex mutex_;
};

class Runtime {
public:
    Runtime(Settings settings, CliContext &context) : s(std::move(settings)), ctx(context) {}

    Settings s;
    CliContext &ctx;

    snapshot::Snapshot &snap() {
        if (!snap_) {
            if (s.snapshot.empty())
                throw UsageError{"no snapshot given (--snapshot or 'snapshot' in the config file)"};
            snap_ = snapshot::Snapshot::open(s.snapshot,
                                             s.read_only ? snapshot::OpenMode::ReadOnly : snapshot::OpenMode::ReadWrite,
                                             s.now, "revmetrics");
        }
        return *snap_;
    }

    std::shared_ptr<retrieval::Fetcher> fetcher() {
        if (!fetcher_) {
            std::shared_ptr<retrieval::Transport> transport;
            retrieval::FetcherOptions options;
            options.requests_per_second = s.requests_per_second;
            if (!s.fixtures.empty()) {
                transport = retrieval::FixtureTransport::load(s.fixtures);
                options.requests_per_second = 0;
            } else if (s.offline) {
                transport = std::make_shared<retrieval::OfflineTransport>();
                options.requests_per_second = 0;
            } else {
                if (!ctx.live_transport)
                    throw Error(ErrorKind::NetworkError, "no network transport available");
                transport = ctx.live_transport();
            }
            snap();
            fetcher_ = std::make_shared<retrieval::Fetcher>(
                transport, std::make_shared<snapshot::SnapshotResponseCache>(snap_), options);
        }
        return fetcher_;
    }

    retrieval::SemanticScholarClient &s2() {
        if (!s2_)
            s2_ = std::make_unique<retrieval::SemanticScholarClient>(fetcher(), s.s2_api_key, s.s2_base_url);
        return *s2_;
    }

    retrieval::LlmClient &llm() {
        if (!llm_) {
            std::shared_ptr<retrieval::LlmClient> inner;
            if (!s.llm_stub.empty()) {
                auto stub = retrieval::StubLlmClient::from_file(s.llm_stub);
                extraction::register_stub_handlers(*stub);
                inner = stub;
            } else {
                inner = std::make_shared<retrieval::HttpLlmClient>(fetcher(), s.llm_base_url, s.llm_api_key,
                                                                   s.llm_model);
            }
            llm_ = std::make_unique<SerializedLlm>(inner);
        }
        return *llm_;
    }

    std::string llm_source() const { return s.llm_stub.empty() ? "llm" : "stub"; }

    void print(const Table &table) { print_table(ctx.out, table, s.format); }

    void item_error(const std::string &id, const std::string &message) {
        ctx.err << id << ": " << message << '\n';
        failed = true;
    }

    void item_warning(const std::string &id, const std::string &message) {
        ctx.err << id << ": warning: " << message << '\n';
    }

    int exit_code() const { return failed ? kExitFailure : kExitOk; }

    bool failed = false;

private:
    std::shared_ptr<snapshot::Snapshot> snap_;
    std::shared_ptr<retrieval::Fetcher> fetcher_;
    std::unique_ptr<retrieval::SemanticScholarClient> s2_;
    std::unique_ptr<retrieval::LlmClient> llm_;
};

std::vector<std::string> resolve_ids(Runtime &rt, const std::vector<std::string> &ids, bool all) {
    if (all == !ids.empty())
        throw UsageError{"give paper ids or --all, not both"};
    if (!all)
        return ids;
    std::vector<std::string> out;
    for (const auto &review : rt.snap().reviews())
        out.push_back(review.paper_id);
    return out;
}

template <typename R> struct Outcome {
    std::optional<R> value;
    std::string error;
};

template <typename R, typename Fn>
std::vector<Outcome<R>> for_each_item(Runtime &rt, const std::vector<std::string> &ids, Fn fn) {
    return retrieval::parallel_map(
        ids,
        [&](const std::string &id) {
            Outcome<R> outcome;
            try {
                outcome.value = fn(id);
            } catch (const Error &e) {
                outcome.error = e.what();
            }
            return outcome;
        },
        rt.s.workers);
}

// ---- commands -------------------------------------------------------------

int cmd_harvest(Runtime &rt, const std::string &keyword, int limit) {
    if (trim(keyword).empty())
        throw UsageError{"harvest needs a non-empty keyword"};
    if (limit < 0)
        throw UsageError{"--limit must be non-negative"};
    retrieval::ArxivClient arxiv(rt.fetcher(), rt.s.arxiv_base_url);
    const auto candidates = arxiv.fetch_candidates(keyword, limit, rt.s.now);
    Table table{{"paper", "published", "title"}, {}};
    for (const auto &record : candidates) {
        const auto id = rt.snap().upsert_paper(record);
        rt.snap().add_review({id, keyword, rt.s.now});
        table.rows.push_back({id,
                              record.publication_date ? json(format_date(*record.publication_date)) : json(nullptr),
                              record.title});
    }
    rt.print(table);
    rt.ctx.err << "harvested " << candidates.size() << " reviews for '" << keyword << "'\n";
    return rt.exit_code();
}

int cmd_enrich(Runtime &rt, const std::vector<std::string> &ids) {
    EnrichOptions options;
    options.today = rt.s.today;
    options.retrieved_at = rt.s.now;
    options.topic_sample_size = rt.s.topic_sample_size;
    options.llm_source = rt.llm_source();
    auto &s2 = rt.s2();
    auto &llm = rt.llm();
    const auto results = for_each_item<EnrichSummary>(
        rt, ids, [&](const std::string &id) { return enrich_paper(rt.snap(), s2, llm, id, options); });
    Table table{{"paper", "topic", "source", "references", "citing", "sample"}, {}};
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const auto &r = results[i];
        if (!r.value) {
            rt.item_error(ids[i], r.error);
            continue;
        }
        for (const auto &w : r.value->warnings)
            rt.item_warning(ids[i], w);
        table.rows.push_back({ids[i], r.value->topic_keyword, r.value->topic_source, r.value->references,
                              r.value->citing, r.value->topic_sample});
    }
    rt.print(table);
    return rt.exit_code();
}

int cmd_score(Runtime &rt, const std::vector<std::string> &ids, IndicatorSelection selection) {
    ScoreOptions options;
    options.selection = selection;
    options.today = rt.s.today;
    options.computed_at = rt.s.now;
    options.beta = rt.s.beta;
    options.iei_window_months = rt.s.iei_window_months;
    auto &snap = rt.snap();
    const auto results = for_each_item<core::IndicatorReport>(
        rt, ids, [&](const std::string &id) { return score_paper(snap, id, options); });

    Table table{{"paper", "topic"}, {}};
    if (selection.tncsi)
        table.headers.insert(table.headers.end(), {"TNCSI"});
    if (selection.iei)
        table.headers.insert(table.headers.end(), {"IEI", "IEI_I"});
    if (selection.rqm)
        table.headers.insert(table.headers.end(), {"ARQ", "S_mp", "RQM"});
    if (selection.rui)
        table.headers.insert(table.headers.end(), {"CDR", "RAD", "RUI"});

    for (std::size_t i = 0; i < ids.size(); ++i) {
        const auto &r = results[i];
        if (!r.value) {
            rt.item_error(ids[i], r.error);
            continue;
        }
        const auto &report = *r.value;
        for (const auto &w : report.warnings)
            rt.item_warning(ids[i], w);
        for (const auto &e : report.errors)
            rt.item_error(ids[i], e);
        if (!snap.read_only())
            snap.store_report(ids[i], report);
        std::vector<json> row{ids[i], report.topic_keyword.empty() ? json(nullptr) : json(report.topic_keyword)};
        if (selection.tncsi)
            row.push_back(opt(report.tncsi));
        if (selection.iei) {
            row.push_back(opt(report.iei_avg));
            row.push_back(opt(report.iei_instant));
        }
        if (selection.rqm) {
            row.push_back(opt(report.arq));
            row.push_back(opt(report.s_mp));
            row.push_back(opt(report.rqm));
        }
        if (selection.rui) {
            row.push_back(opt(report.cdr));
            row.push_back(opt(report.rad));
            row.push_back(opt(report.rui));
        }
        table.rows.push_back(std::move(row));
    }
    rt.print(table);
    return rt.exit_code();
}

std::string document_file_name(const std::string &id) {
    std::string name = id;
    std::replace_if(name.begin(), name.end(), [](char c) { return c == ':' || c == '/' || c == '\\'; }, '_');
    return name + ".txt";
}

int cmd_features(Runtime &rt, const std::vector<std::string> &ids, const std::string &docs) {
    if (docs.empty())
        throw UsageError{"features needs --docs <dir> with one <id>.txt per review (':' and '/' become '_')"};
    auto &llm = rt.llm();
    auto &snap = rt.snap();
    const auto results = for_each_item<extraction::DocumentAnalysis>(rt, ids, [&](const std::string &id) {
        snap.require_paper(id);
        const auto path = (std::filesystem::path(docs) / document_file_name(id)).string();
        return extraction::analyze_document(extraction::parse_structured_text(read_text_file(path)), llm);
    });
    Table table{{"paper", "words", "figures", "tables"}, {}};
    for (const auto &name : snapshot::feature_names())
        table.headers.push_back(name);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const auto &r = results[i];
        if (!r.value) {
            rt.item_error(ids[i], r.error);
            continue;
        }
        if (!snap.read_only())
            snap.store_features(ids[i], r.value->features, rt.s.now);
        std::vector<json> row{ids[i], r.value->word_count, r.value->captions.figures.size(),
                              r.value->captions.tables.size()};
        for (const auto &name : snapshot::feature_names())
            row.push_back(snapshot::feature_value(r.value->features, name));
        table.rows.push_back(std::move(row));
    }
    rt.print(table);
    return rt.exit_code();
}

const std::vector<std::string> &indicator_metrics() {
    static const std::vector<std::string> names{"tncsi", "iei", "iei_instant", "arq", "s_mp", "rqm",
                                                "cdr",   "rad", "rui",         "citations", "references",
                                                "authors", "year"};
    return names;
}

bool known_metric(const std::string &name) {
    const auto &features = snapshot::feature_names();
    return std::count(indicator_metrics().begin(), indicator_metrics().end(), name) ||
           std::count(features.begin(), features.end(), name);
}

// Metric value of every review, in review order; nullopt when absent.
std::vector<std::optional<double>> metric_column(snapshot::Snapshot &snap, const std::string &metric) {
    std::vector<std::optional<double>> column;
    const auto &features = snapshot::feature_names();
    const bool is_feature = std::count(features.begin(), features.end(), metric) > 0;
    for (const auto &review : snap.reviews()) {
        std::optional<double> value;
        if (is_feature) {
            if (const auto stored = snap.latest_features(review.paper_id))
                value = snapshot::feature_value(stored->features, metric);
        } else if (metric == "citations" || metric == "references" || metric == "authors" || metric == "year") {
            const auto record = snap.require_paper(review.paper_id);
            if (metric == "citations" && record.citation_count)
                value = static_cast<double>(*record.citation_count);
            else if (metric == "references")
                value = static_cast<double>(record.reference_ids.size());
            else if (metric == "authors")
                value = static_cast<double>(record.author_count);
            else if (metric == "year" && record.publication_date)
                value = static_cast<int>(record.publication_date->year());
        } else if (const auto report = snap.latest_report(review.paper_id)) {
            const std::map<std::string, std::optional<double>> values{
                {"tncsi", report->tncsi},
                {"iei", report->iei_avg},
                {"iei_instant", report->iei_instant},
                {"arq", report->arq},
                {"s_mp", report->s_mp ? std::optional<double>(static_cast<double>(*report->s_mp)) : std::nullopt},
                {"rqm", report->rqm},
                {"cdr", report->cdr},
                {"rad", report->rad},
                {"rui", report->rui}};
            value = values.at(metric);
        }
        column.push_back(value);
    }
    return column;
}

int cmd_stats(Runtime &rt, const std::vector<std::string> &metrics, const std::string &against) {
    for (const auto &m : metrics)
        if (!known_metric(m))
            throw UsageError{"unknown metric '" + m + "'"};
    if (!against.empty() && !known_metric(against))
        throw UsageError{"unknown metric '" + against + "'"};
    auto &snap = rt.snap();
    if (against.empty()) {
        Table table{{"metric", "n", "max", "min", "mean", "median", "mode"}, {}};
        for (const auto &metric : metrics) {
            std::vector<double> values;
            for (const auto &v : metric_column(snap, metric))
                if (v)
                    values.push_back(*v);
            try {
                const auto s = analysis::descriptive_stats(values);
                table.rows.push_back({metric, s.count, s.max, s.min, s.mean, s.median, s.mode});
            } catch (const Error &e) {
                rt.item_error(metric, e.what());
            }
        }
        rt.print(table);
        return rt.exit_code();
    }
    const auto other = metric_column(snap, against);
    Table table{{"metric", "against", "n", "pearson_r", "pearson_p", "spearman_rho", "spearman_p", "p_method"}, {}};
    for (const auto &metric : metrics) {
        const auto column = metric_column(snap, metric);
        std::vector<double> x, y;
        for (std::size_t i = 0; i < column.size(); ++i)
            if (column[i] && other[i]) {
                x.push_back(*column[i]);
                y.push_back(*other[i]);
            }
        try {
            const auto c = analysis::correlations(x, y);
            table.rows.push_back(
                {metric, against, c.n, c.pearson_r, c.pearson_p, c.spearman_rho, c.spearman_p, "t(n-2)"});
        } catch (const Error &e) {
            rt.item_error(metric, e.what());
        }
    }
    rt.print(table);
    return rt.exit_code();
}

int cmd_trend(Runtime &rt, const std::string &feature, double sigma) {
    const auto &names = snapshot::feature_names();
    if (feature != "all" && !std::count(names.begin(), names.end(), feature))
        throw UsageError{"unknown feature '" + feature + "'"};
    if (!(sigma >= 0))
        throw UsageError{"--sigma must be non-negative"};
    auto &snap = rt.snap();
    std::vector<std::pair<int, snapshot::FeatureVector>> rows;
    for (const auto &review : snap.reviews()) {
        const auto stored = snap.latest_features(review.paper_id);
        const auto record = snap.require_paper(review.paper_id);
        if (stored && record.publication_date)
            rows.emplace_back(static_cast<int>(record.publication_date->year()), stored->features);
    }
    if (rows.empty())
        throw Error(ErrorKind::EmptyInput, "no reviews with stored features and a publication date");
    const auto trend = analysis::yearly_feature_trend(rows, sigma);
    Table table{{"year", "reviews", "feature", "raw", "smoothed"}, {}};
    for (std::size_t f = 0; f < trend.raw.size(); ++f) {
        if (feature != "all" && trend.raw[f].first != feature)
            continue;
        for (std::size_t y = 0; y < trend.years.size(); ++y)
            table.rows.push_back({trend.years[y], trend.reviews_per_year[y], trend.raw[f].first,
                                  trend.raw[f].second[y], trend.smoothed[f].second[y]});
    }
    rt.print(table);
    return rt.exit_code();
}

int cmd_robustness(Runtime &rt, const std::string &groups_file, std::size_t bins, double epsilon) {
    if (bins < 1)
        throw UsageError{"--bins must be positive"};
    const auto groups = analysis::parse_synonym_groups(read_text_file(groups_file));
    auto &snap = rt.snap();
    const analysis::SampleSource source = [&](const std::string &keyword) {
        if (const auto stored = snap.topic_sample(keyword))
            return stored->sample_citation_counts;
        const auto fetched = rt.s2().fetch_topic_sample(keyword, rt.s.topic_sample_size, rt.s.now);
        if (!snap.read_only())
            snap.put_topic_sample(fetched);
        return fetched.sample_citation_counts;
    };
    const auto result = analysis::synonym_robustness(groups, source, epsilon, bins);
    Table table{{"group", "term", "kl"}, {}};
    for (const auto &group : result.groups) {
        for (const auto &term : group.terms)
            table.rows.push_back({group.anchor, term.term, term.kl});
        table.rows.push_back({group.anchor, "(mean)", group.mean_kl});
    }
    table.rows.push_back({"(all groups)", "(mean)", result.overall});
    rt.print(table);
    return rt.exit_code();
}

int cmd_export(Runtime &rt, const std::string &path, const std::string &kinds_list) {
    std::set<std::string> kinds;
    std::istringstream in(kinds_list);
    for (std::string kind; std::getline(in, kind, ',');) {
        kind = trim(kind);
        if (kind.empty())
            continue;
        const auto &known = snapshot::record_kinds();
        if (!std::count(known.begin(), known.end(), kind))
            throw UsageError{"unknown record kind '" + kind + "'"};
        kinds.insert(kind);
    }
    std::size_t lines = 0;
    if (path == "-") {
        lines = rt.snap().export_jsonl(rt.ctx.out, kinds);
    } else {
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw Error(ErrorKind::StorageError, "cannot write " + path);
        lines = rt.snap().export_jsonl(out, kinds);
    }
    rt.ctx.err << "exported " << lines << " records\n";
    return rt.exit_code();
}

int cmd_import(Runtime &rt, const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorKind::InvalidArgument, "cannot read " + path);
    const auto result = rt.snap().import_jsonl(in);
    for (const auto &problem : result.problems)
        rt.item_error(path, "CorruptLine: " + problem);
    rt.ctx.out << "imported " << result.imported << " records, " << result.corrupt << " corrupt lines\n";
    return rt.exit_code();
}

} // namespace

const std::vector<std::string> &config_keys() {
    static const std::vector<std::string> keys{
        "snapshot",  "s2_api_key", "s2_base_url",         "arxiv_base_url", "llm_api_key",       "llm_base_url",
        "llm_model", "llm_stub",   "fixtures",            "format",         "offline",           "read_only",
        "requests_per_second",     "workers",             "topic_sample_size", "beta",           "iei_window_months"};
    return keys;
}

std::map<std::string, std::string> parse_config(const std::string &text) {
    std::map<std::string, std::string> out;
    std::istringstream in(text);
    int number = 0;
    for (std::string line; std::getline(in, line);) {
        ++number;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#')
            continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorKind::ParseError, "config line " + std::to_string(number) + ": expected key = value");
        const std::string key = trim(stripped.substr(0, eq));
        if (!std::count(config_keys().begin(), config_keys().end(), key))
            throw Error(ErrorKind::ParseError,
                        "config line " + std::to_string(number) + ": unknown key '" + key + "'");
        out[key] = trim(stripped.substr(eq + 1));
    }
    return out;
}

int run_cli(const std::vector<std::string> &args, CliContext &context) {
    CLI::App app{"Bibliometric indicators for review papers: harvest, enrich, score and analyze.", "revmetrics"};
    app.require_subcommand(1, 1);
    app.fallthrough();

    std::string snapshot_path, config_path, fixtures, now_text, llm_stub, format;
    double rps = 0;
    std::size_t workers = 0;
    bool offline = false, read_only = false;
    auto *snapshot_opt = app.add_option("--snapshot", snapshot_path, "Snapshot file (SQLite)");
    app.add_option("--config", config_path, "key = value config file");
    auto *offline_opt = app.add_flag("--offline", offline, "Forbid all network access");
    auto *fixtures_opt = app.add_option("--fixtures", fixtures, "Replay recorded exchanges from an NDJSON file or dir");
    app.add_option("--now", now_text, "Freeze the current date (YYYY-MM-DD)");
    auto *read_only_opt = app.add_flag("--read-only", read_only, "Open the snapshot read-only");
    auto *stub_opt = app.add_option("--llm-stub", llm_stub, "Answer LLM prompts from a JSON stub table");
    auto *format_opt = app.add_option("--format", format, "Output format")->check(CLI::IsMember({"table", "csv", "json"}));
    auto *rps_opt = app.add_option("--rps", rps, "Requests per second per host")->check(CLI::NonNegativeNumber);
    auto *workers_opt = app.add_option("--workers", workers, "Batch worker threads")->check(CLI::PositiveNumber);

    std::string keyword;
    int limit = 100;
    auto *harvest = app.add_subcommand("harvest", "Query arXiv for reviews on a keyword and store them");
    harvest->add_option("keyword", keyword, "Topic keyword")->required();
    harvest->add_option("--limit", limit, "Maximum raw arXiv hits")->capture_default_str();

    std::vector<std::string> ids;
    bool all = false;
    auto *enrich = app.add_subcommand("enrich", "Fetch Semantic Scholar data needed for scoring");
    enrich->add_option("ids", ids, "Paper ids");
    enrich->add_flag("--all", all, "Every review in the snapshot");

    IndicatorSelection selection;
    bool want_tncsi = false, want_iei = false, want_rqm = false, want_rui = false;
    double beta = 0;
    auto *score = app.add_subcommand("score", "Compute indicators from the snapshot and store the reports");
    score->add_option("ids", ids, "Paper ids");
    score->add_flag("--all", all, "Every review in the snapshot");
    score->add_flag("--tncsi", want_tncsi);
    score->add_flag("--iei", want_iei);
    score->add_flag("--rqm", want_rqm);
    score->add_flag("--rui", want_rui);
    auto *beta_opt = score->add_option("--beta", beta, "RQM shift parameter")->check(CLI::PositiveNumber);

    std::string docs;
    auto *features = app.add_subcommand("features", "Extract review content features from pre-extracted text");
    features->add_option("ids", ids, "Paper ids");
    features->add_flag("--all", all, "Every review in the snapshot");
    features->add_option("--docs", docs, "Directory of structured text files");

    std::vector<std::string> metrics;
    std::string against;
    auto *stats = app.add_subcommand("stats", "Descriptive statistics or correlations over reviews");
    stats->add_option("metric", metrics, "Indicator, paper or feature metric")->required();
    stats->add_option("--against", against, "Correlate with this metric");

    std::string feature = "all";
    double sigma = analysis::kDefaultTrendSigma;
    auto *trend = app.add_subcommand("trend", "Per-year feature proportions with Gaussian smoothing");
    trend->add_option("--feature", feature)->capture_default_str();
    trend->add_option("--sigma", sigma)->capture_default_str();

    std::string groups_file;
    std::size_t bins = analysis::kDefaultHistogramBins;
    double epsilon = core::kDefaultKlEpsilon;
    auto *robustness = app.add_subcommand("robustness", "KL divergence between citation samples of synonyms");
    robustness->add_option("groups-file", groups_file, "Lines of 'anchor | synonym | ...'")->required();
    robustness->add_option("--bins", bins)->capture_default_str();
    robustness->add_option("--epsilon", epsilon)->check(CLI::PositiveNumber);

    std::string path, kinds;
    auto *export_cmd = app.add_subcommand("export", "Write the snapshot as JSON lines ('-' for stdout)");
    export_cmd->add_option("path", path)->required();
    export_cmd->add_option("--kinds", kinds, "Comma-separated record kinds");
    auto *import_cmd = app.add_subcommand("import", "Load JSON lines into the snapshot");
    import_cmd->add_option("path", path)->required();

    CLI::App *active = &app;
    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
        for (auto *sub : app.get_subcommands())
            active = sub;

        Settings settings;
        if (!config_path.empty())
            for (const auto &[key, value] : parse_config(read_text_file(config_path)))
                apply_setting(settings, key, value);
        const std::pair<const char *, const char *> env_keys[] = {
            {"S2_API_KEY", "s2_api_key"}, {"LLM_API_KEY", "llm_api_key"}, {"LLM_BASE_URL", "llm_base_url"}};
        for (const auto &[env_name, key] : env_keys)
            if (const auto it = context.env.find(env_name); it != context.env.end() && !it->second.empty())
                apply_setting(settings, key, it->second);
        if (snapshot_opt->count())
            settings.snapshot = snapshot_path;
        if (offline_opt->count())
            settings.offline = offline;
        if (fixtures_opt->count())
            settings.fixtures = fixtures;
        if (read_only_opt->count())
            settings.read_only = read_only;
        if (stub_opt->count())
            settings.llm_stub = llm_stub;
        if (format_opt->count())
            settings.format = format;
        if (rps_opt->count())
            settings.requests_per_second = rps;
        if (workers_opt->count())
            settings.workers = workers;
        if (beta_opt->count())
            settings.beta = beta;
        if (!now_text.empty()) {
            const auto today = parse_date(now_text);
            if (!today)
                throw UsageError{"--now expects YYYY-MM-DD, got '" + now_text + "'"};
            settings.today = *today;
            settings.now = start_of(*today);
        } else {
            settings.now = now_utc();
            settings.today = date_of(settings.now);
        }

        Runtime rt(std::move(settings), context);
        if (harvest->parsed())
            return cmd_harvest(rt, keyword, limit);
        if (enrich->parsed())
            return cmd_enrich(rt, resolve_ids(rt, ids, all));
        if (score->parsed()) {
            if (want_tncsi || want_iei || want_rqm || want_rui)
                selection = {want_tncsi, want_iei, want_rqm, want_rui};
            return cmd_score(rt, resolve_ids(rt, ids, all), selection);
        }
        if (features->parsed())
            return cmd_features(rt, resolve_ids(rt, ids, all), docs);
        if (stats->parsed())
            return cmd_stats(rt, metrics, against);
        if (trend->parsed())
            return cmd_trend(rt, feature, sigma);
        if (robustness->parsed())
            return cmd_robustness(rt, groups_file, bins, epsilon);
        if (export_cmd->parsed())
            return cmd_export(rt, path, kinds);
        if (import_cmd->parsed())
            return cmd_import(rt, path);
        return kExitUsage;
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e, context.out, context.err);
        return code == 0 ? kExitOk : kExitUsage;
    } catch (const UsageError &e) {
        context.err << "usage error: " << e.message << "\n\n" << active->help();
        return kExitUsage;
    } catch (const Error &e) {
        if (e.kind() == ErrorKind::ParseError && !config_path.empty() && e.detail().rfind("config line", 0) == 0) {
            context.err << "usage error: " << e.detail() << '\n';
            return kExitUsage;
        }
        context.err << "error: " << e.what() << '\n';
        return kExitFailure;
    } catch (const std::exception &e) {
        context.err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

} // namespace revmetrics::cli
