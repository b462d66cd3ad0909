#include "revmetrics/cli/pipeline.hpp"

#include <algorithm>
#include <functional>

#include "revmetrics/core/citation_success.hpp"
#include "revmetrics/core/impact_evolution.hpp"
#include "revmetrics/core/update_index.hpp"
#include "revmetrics/error.hpp"

namespace revmetrics::cli {

namespace {

using retrieval::PaperRecord;

// Runs one indicator; a library error becomes a report error line.
void attempt(core::IndicatorReport &report, const std::string &indicator, const std::function<void()> &body) {
    try {
        body();
    } catch (const Error &e) {
        report.errors.push_back(std::string(to_string(e.kind())) + ": " + indicator + " uncomputable (" + e.detail() +
                                ")");
    }
}

Date require_date(const PaperRecord &record) {
    if (!record.publication_date)
        throw Error(ErrorKind::EmptyResult, record.canonical_id + " has no publication date");
    return *record.publication_date;
}

std::string require_topic(snapshot::Snapshot &snap, const std::string &paper_id) {
    const auto topic = snap.topic(paper_id);
    if (!topic || topic->keyword.empty())
        throw Error(ErrorKind::EmptyResult, "no topic keyword assigned");
    return topic->keyword;
}

std::int64_t require_count(snapshot::Snapshot &snap, const std::string &keyword, const Date &from, const Date &to) {
    const auto count = snap.relevance_count(keyword, from, to);
    if (!count)
        throw Error(ErrorKind::EmptyResult, "no relevance count for '" + keyword + "' over [" + format_date(from) +
                                                ", " + format_date(to) + ")");
    return count->count;
}

} // namespace

std::optional<Date> median_reference_date(snapshot::Snapshot &snap, const PaperRecord &record) {
    std::vector<Date> dates;
    for (const auto &ref : record.reference_ids)
        if (const auto stored = snap.paper(ref); stored && stored->publication_date)
            dates.push_back(*stored->publication_date);
    if (dates.empty())
        return std::nullopt;
    std::sort(dates.begin(), dates.end());
    return dates[(dates.size() - 1) / 2];
}

core::IndicatorReport score_paper(snapshot::Snapshot &snap, const std::string &paper_id, const ScoreOptions &options) {
    const PaperRecord record = snap.require_paper(paper_id);
    core::IndicatorReport report;
    report.beta = options.beta;
    report.computed_at = options.computed_at;
    if (const auto topic = snap.topic(paper_id))
        report.topic_keyword = topic->keyword;

    std::optional<core::ExponentialFit> fit;
    const auto topic_fit = [&]() -> const core::ExponentialFit & {
        if (!fit) {
            const std::string keyword = require_topic(snap, paper_id);
            const auto sample = snap.topic_sample(keyword);
            if (!sample)
                throw Error(ErrorKind::EmptyResult, "no topic sample for '" + keyword + "'");
            fit = core::fit_exponential_mle(sample->sample_citation_counts);
            report.sample_size = fit->sample_size;
        }
        return *fit;
    };

    if (options.selection.tncsi)
        attempt(report, "TNCSI", [&] {
            const auto &f = topic_fit();
            if (!record.citation_count)
                throw Error(ErrorKind::EmptyResult, "no citation count");
            report.tncsi = core::tncsi(*record.citation_count, f);
        });

    if (options.selection.iei)
        attempt(report, "IEI", [&] {
            const auto history = snap.citations(paper_id);
            if (!history)
                throw Error(ErrorKind::EmptyResult, "no citation history");
            const auto monthly =
                retrieval::bucket_monthly_citations(history->citing, options.iei_window_months, options.today);
            report.iei_avg = core::iei_average(monthly.series);
            report.iei_instant = core::iei_instantaneous(monthly.series);
            if (monthly.dropped_undated > 0)
                report.warnings.push_back("IEI: " + std::to_string(monthly.dropped_undated) +
                                          " citing papers without a date left out");
        });

    if (options.selection.rqm)
        attempt(report, "RQM", [&] {
            const auto &f = topic_fit();
            const Date published = require_date(record);
            std::vector<double> quality;
            std::vector<std::int64_t> ages;
            std::size_t missing = 0;
            for (const auto &ref : record.reference_ids) {
                const auto stored = snap.paper(ref);
                if (!stored || !stored->citation_count) {
                    ++missing;
                    continue;
                }
                quality.push_back(core::tncsi(*stored->citation_count, f));
                if (stored->publication_date)
                    ages.push_back(std::max(0, whole_months_between(*stored->publication_date, published)));
            }
            if (missing > 0)
                report.warnings.push_back("RQM: " + std::to_string(missing) + " of " +
                                          std::to_string(record.reference_ids.size()) +
                                          " references missing from the snapshot");
            const double arq = core::arq(quality);
            const auto s_mp = core::median_semesters(ages);
            report.arq = arq;
            report.s_mp = s_mp;
            report.rqm = core::rqm({arq, s_mp, options.beta});
        });

    if (options.selection.rui)
        attempt(report, "RUI", [&] {
            const Date published = require_date(record);
            const std::string keyword = require_topic(snap, paper_id);
            const auto median_ref = median_reference_date(snap, record);
            if (!median_ref)
                throw Error(ErrorKind::EmptyReferenceList, "no dated references in the snapshot");
            const auto n_mp = require_count(snap, keyword, *median_ref, published);
            const auto n_pc = require_count(snap, keyword, published, options.today);
            const auto m_pc = whole_months_between(published, options.today);
            const double cdr = core::cdr(n_pc, n_mp);
            const double rad = core::rad(m_pc);
            if (core::rad_extrapolates(m_pc))
                report.warnings.push_back("RAD: " + std::to_string(m_pc) +
                                          " months since publication exceeds the fitted 72-month range");
            report.cdr = cdr;
            report.rad = rad;
            report.rui = core::rui(cdr, rad);
        });

    return report;
}

EnrichSummary enrich_paper(snapshot::Snapshot &snap, retrieval::SemanticScholarClient &s2, retrieval::LlmClient &llm,
                           const std::string &paper_id, const EnrichOptions &options) {
    EnrichSummary summary;
    summary.paper_id = paper_id;
    const PaperRecord original = snap.require_paper(paper_id);
    PaperRecord merged = s2.enrich(original, options.retrieved_at);

    const auto lookup = retrieval::SemanticScholarClient::lookup_id(merged);
    if (!lookup)
        throw Error(ErrorKind::UnknownPaper, paper_id + " has no Semantic Scholar identifier");

    merged.reference_ids.clear();
    for (const auto &ref : s2.fetch_references(*lookup, options.retrieved_at)) {
        try {
            merged.reference_ids.push_back(snap.upsert_paper(ref));
        } catch (const Error &e) {
            summary.warnings.push_back("reference skipped: " + std::string(e.what()));
        }
    }
    snap.upsert_paper(merged);
    summary.references = merged.reference_ids.size();

    if (const auto topic = snap.topic(paper_id)) {
        summary.topic_keyword = topic->keyword;
        summary.topic_source = topic->source;
    } else {
        try {
            summary.topic_keyword = retrieval::llm_topic_keyword(merged.title, merged.abstract, options.profile, llm);
            summary.topic_source = options.llm_source;
        } catch (const Error &e) {
            if (e.kind() != ErrorKind::LlmUnavailable && e.kind() != ErrorKind::MalformedResponse)
                throw;
            std::string fallback;
            for (const auto &review : snap.reviews())
                if (review.paper_id == paper_id)
                    fallback = review.harvest_keyword;
            if (fallback.empty())
                throw;
            summary.warnings.push_back("topic keyword falls back to the harvest keyword: " + std::string(e.what()));
            summary.topic_keyword = fallback;
            summary.topic_source = "harvest";
        }
        snap.set_topic({paper_id, summary.topic_keyword, summary.topic_source});
    }

    auto sample = snap.topic_sample(summary.topic_keyword);
    if (!sample) {
        sample = s2.fetch_topic_sample(summary.topic_keyword, options.topic_sample_size, options.retrieved_at);
        snap.put_topic_sample(*sample);
    }
    summary.topic_sample = sample->sample_citation_counts.size();

    snapshot::CitationHistory history{paper_id, options.retrieved_at, s2.fetch_citing_papers(*lookup)};
    summary.citing = history.citing.size();
    snap.put_citations(history);

    if (merged.publication_date) {
        const Date published = *merged.publication_date;
        const auto store_count = [&](const Date &from, const Date &to) {
            if (snap.relevance_count(summary.topic_keyword, from, to))
                return;
            const auto n = s2.count_relevant(summary.topic_keyword, from, to);
            snap.put_relevance_count({summary.topic_keyword, from, to, n, options.retrieved_at});
        };
        if (const auto median_ref = median_reference_date(snap, merged); median_ref && *median_ref <= published)
            store_count(*median_ref, published);
        else
            summary.warnings.push_back("no dated references before publication; RUI baseline not fetched");
        if (published <= options.today)
            store_count(published, options.today);
    } else {
        summary.warnings.push_back("no publication date; RUI counts not fetched");
    }
    return summary;
}

} // namespace revmetrics::cli
