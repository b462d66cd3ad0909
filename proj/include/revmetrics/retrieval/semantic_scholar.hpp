#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "revmetrics/core/impact_evolution.hpp"
#include "revmetrics/retrieval/fetcher.hpp"
#include "revmetrics/retrieval/paper_record.hpp"

namespace revmetrics::retrieval {

/// Citation-count sample of the search hits for one topic keyword.
struct TopicContext {
    std::string keyword;
    std::vector<std::int64_t> sample_citation_counts;
    std::int64_t k = 1000;
    Timestamp fetched_at{};
    /// Endpoint and parameters that produced the sample.
    std::string provenance;
};

struct CitingPaper {
    std::string paper_id;
    std::optional<Date> publication_date;
};

struct MonthlyCitations {
    core::CitationSeries series;
    /// Citing papers without a publication date, left out of every bucket.
    std::int64_t dropped_undated = 0;
};

/// Buckets citing papers by publication month into the `window_months`
/// calendar months that end with the month before `today`'s month.
MonthlyCitations bucket_monthly_citations(const std::vector<CitingPaper> &citing, int window_months, const Date &today);

/// Semantic Scholar graph API client. Construction performs no requests.
class SemanticScholarClient {
public:
    static constexpr const char *kDefaultBaseUrl = "https://api.semanticscholar.org/graph/v1";
    static constexpr int kSearchPageSize = 100;
    static constexpr int kListPageSize = 1000;

    SemanticScholarClient(std::shared_ptr<Fetcher> fetcher, std::string api_key = {},
                          std::string base_url = kDefaultBaseUrl);

    /// S2 lookup id for a record: arXiv id, else DOI, else nullopt.
    static std::optional<std::string> lookup_id(const PaperRecord &record);

    std::string paper_url(const std::string &lookup) const;
    std::string references_url(const std::string &lookup, int offset) const;
    std::string citations_url(const std::string &lookup, int offset) const;
    std::string search_url(const std::string &keyword, int offset, int limit) const;
    std::string bulk_search_url(const std::string &keyword, const Date &from, const Date &to_inclusive,
                                const std::string &token) const;
    std::string title_match_url(const std::string &title) const;

    /// Paper metadata. Throws UnknownPaper on 404.
    PaperRecord fetch_paper(const std::string &lookup, Timestamp retrieved_at);
    /// Best title match; the record's id_join is "title". Throws UnknownPaper.
    PaperRecord match_title(const std::string &title, Timestamp retrieved_at);
    /// Enriches an arXiv record, joining on arXiv id, then DOI, then title.
    PaperRecord enrich(const PaperRecord &record, Timestamp retrieved_at);

    std::vector<PaperRecord> fetch_references(const std::string &lookup, Timestamp retrieved_at);
    std::vector<CitingPaper> fetch_citing_papers(const std::string &lookup);

    /// Citation counts of up to k relevance-ranked hits. Throws EmptyResult.
    TopicContext fetch_topic_sample(const std::string &keyword, std::int64_t k, Timestamp fetched_at);

    /// Hits published in [from, to). Throws InvalidDateRange when from > to.
    std::int64_t count_relevant(const std::string &keyword, const Date &from, const Date &to);

    MonthlyCitations fetch_monthly_citations(const std::string &lookup, int window_months, const Date &today);

private:
    HttpResponse get(const std::string &url);
    nlohmann::json get_json(const std::string &url, const std::string &what);

    std::shared_ptr<Fetcher> fetcher_;
    std::string api_key_;
    std::string base_url_;
};

/// Converts one S2 paper JSON object into a record.
PaperRecord paper_from_s2_json(const nlohmann::json &paper, Timestamp retrieved_at);

} // namespace revmetrics::retrieval
