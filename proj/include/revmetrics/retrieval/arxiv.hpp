#pragma once

#include <memory>
#include <string>
#include <vector>

#include "revmetrics/retrieval/fetcher.hpp"
#include "revmetrics/retrieval/paper_record.hpp"

namespace revmetrics::retrieval {

/// `(ti:"review" OR ti:"survey") AND (ti:"<kw>" OR abs:"<kw>")` with the
/// keyword lowercased. Throws EmptyKeyword.
std::string arxiv_review_query(const std::string &keyword);

/// Parses an arXiv Atom feed. Throws ParseError on malformed XML or an API
/// error entry.
std::vector<PaperRecord> parse_arxiv_feed(const std::string &xml, Timestamp retrieved_at);

/// Case-insensitive containment of the keyword in the abstract, with runs of
/// whitespace in the abstract collapsed first.
bool abstract_mentions(const std::string &abstract, const std::string &keyword);

class ArxivClient {
public:
    static constexpr const char *kDefaultBaseUrl = "http://export.arxiv.org/api/query";
    static constexpr int kPageSize = 100;

    explicit ArxivClient(std::shared_ptr<Fetcher> fetcher, std::string base_url = kDefaultBaseUrl);

    std::string page_url(const std::string &keyword, int start, int max_results) const;

    /// Up to `limit` raw hits for the review query, filtered to those whose
    /// abstract mentions the keyword. Records carry no citation data.
    std::vector<PaperRecord> fetch_candidates(const std::string &keyword, int limit, Timestamp retrieved_at);

private:
    std::shared_ptr<Fetcher> fetcher_;
    std::string base_url_;
};

} // namespace revmetrics::retrieval
