#include "revmetrics/retrieval/semantic_scholar.hpp"

#include "revmetrics/error.hpp"

namespace revmetrics::retrieval {

namespace {

constexpr const char *kPaperFields = "paperId,externalIds,title,abstract,publicationDate,venue,citationCount,authors";
constexpr const char *kReferenceFields = "paperId,externalIds,title,publicationDate,venue,citationCount";

std::string string_or_empty(const nlohmann::json &obj, const char *key) {
    const auto it = obj.find(key);
    if (it == obj.end() || !it->is_string())
        return {};
    return it->get<std::string>();
}

} // namespace

MonthlyCitations bucket_monthly_citations(const std::vector<CitingPaper> &citing, int window_months,
                                          const Date &today) {
    if (window_months < 2)
        throw Error(ErrorKind::InvalidArgument, "citation window must cover at least 2 months");
    const int current = month_index(today);
    const int first = current - window_months;
    std::vector<std::int64_t> counts(static_cast<std::size_t>(window_months), 0);
    std::int64_t dropped = 0;
    for (const auto &paper : citing) {
        if (!paper.publication_date) {
            ++dropped;
            continue;
        }
        const int m = month_index(*paper.publication_date);
        if (m >= first && m < current)
            ++counts[static_cast<std::size_t>(m - first)];
    }
    const std::chrono::year_month end{today.year(), today.month()};
    return MonthlyCitations{core::CitationSeries(std::move(counts), end), dropped};
}

PaperRecord paper_from_s2_json(const nlohmann::json &paper, Timestamp retrieved_at) {
    if (!paper.is_object())
        throw Error(ErrorKind::ParseError, "Semantic Scholar paper is not an object");
    PaperRecord record;
    const std::string s2_id = string_or_empty(paper, "paperId");
    if (!s2_id.empty())
        record.external_ids["s2"] = s2_id;
    if (const auto ext = paper.find("externalIds"); ext != paper.end() && ext->is_object()) {
        if (const auto arxiv = ext->find("ArXiv"); arxiv != ext->end() && arxiv->is_string())
            record.external_ids["arxiv"] = normalize_arxiv_id(arxiv->get<std::string>());
        if (const auto doi = ext->find("DOI"); doi != ext->end() && doi->is_string())
            record.external_ids["doi"] = doi->get<std::string>();
    }
    if (record.external_ids.count("arxiv"))
        record.canonical_id = arxiv_canonical_id(record.external_ids["arxiv"]);
    else if (record.external_ids.count("doi"))
        record.canonical_id = doi_canonical_id(record.external_ids["doi"]);
    else if (!s2_id.empty())
        record.canonical_id = s2_canonical_id(s2_id);
    else
        throw Error(ErrorKind::ParseError, "Semantic Scholar paper without any identifier");

    record.title = string_or_empty(paper, "title");
    record.abstract = string_or_empty(paper, "abstract");
    record.publication_date = parse_date(string_or_empty(paper, "publicationDate"));
    if (const std::string venue = string_or_empty(paper, "venue"); !venue.empty())
        record.venue = venue;
    if (const auto cc = paper.find("citationCount"); cc != paper.end() && cc->is_number_integer())
        record.citation_count = cc->get<std::int64_t>();
    if (const auto authors = paper.find("authors"); authors != paper.end() && authors->is_array())
        record.author_count = static_cast<std::int64_t>(authors->size());
    record.retrieved_at = retrieved_at;
    return record;
}

SemanticScholarClient::SemanticScholarClient(std::shared_ptr<Fetcher> fetcher, std::string api_key,
                                             std::string base_url)
    : fetcher_(std::move(fetcher)), api_key_(std::move(api_key)), base_url_(std::move(base_url)) {}

std::optional<std::string> SemanticScholarClient::lookup_id(const PaperRecord &record) {
    if (const auto it = record.external_ids.find("arxiv"); it != record.external_ids.end() && !it->second.empty())
        return "arXiv:" + it->second;
    if (const auto it = record.external_ids.find("doi"); it != record.external_ids.end() && !it->second.empty())
        return "DOI:" + it->second;
    if (const auto it = record.external_ids.find("s2"); it != record.external_ids.end() && !it->second.empty())
        return it->second;
    return std::nullopt;
}

std::string SemanticScholarClient::paper_url(const std::string &lookup) const {
    return base_url_ + "/paper/" + url_encode(lookup) + "?fields=" + url_encode(kPaperFields);
}

std::string SemanticScholarClient::references_url(const std::string &lookup, int offset) const {
    return base_url_ + "/paper/" + url_encode(lookup) + "/references?fields=" + url_encode(kReferenceFields) +
           "&offset=" + std::to_string(offset) + "&limit=" + std::to_string(kListPageSize);
}

std::string SemanticScholarClient::citations_url(const std::string &lookup, int offset) const {
    return base_url_ + "/paper/" + url_encode(lookup) + "/citations?fields=" + url_encode("paperId,publicationDate") +
           "&offset=" + std::to_string(offset) + "&limit=" + std::to_string(kListPageSize);
}

std::string SemanticScholarClient::search_url(const std::string &keyword, int offset, int limit) const {
    return base_url_ + "/paper/search?query=" + url_encode(keyword) + "&offset=" + std::to_string(offset) +
           "&limit=" + std::to_string(limit) + "&fields=citationCount";
}

std::string SemanticScholarClient::bulk_search_url(const std::string &keyword, const Date &from,
                                                   const Date &to_inclusive, const std::string &token) const {
    std::string url = base_url_ + "/paper/search/bulk?query=" + url_encode(keyword) + "&publicationDateOrYear=" +
                      format_date(from) + ":" + format_date(to_inclusive) + "&fields=publicationDate";
    if (!token.empty())
        url += "&token=" + url_encode(token);
    return url;
}

std::string SemanticScholarClient::title_match_url(const std::string &title) const {
    return base_url_ + "/paper/search/match?query=" + url_encode(title) + "&fields=" + url_encode(kPaperFields);
}

HttpResponse SemanticScholarClient::get(const std::string &url) {
    HttpRequest request{"GET", url, {}, ""};
    if (!api_key_.empty())
        request.headers.emplace_back("x-api-key", api_key_);
    return fetcher_->fetch(request);
}

nlohmann::json SemanticScholarClient::get_json(const std::string &url, const std::string &what) {
    const HttpResponse response = get(url);
    if (response.status == 404)
        throw Error(ErrorKind::UnknownPaper, what + " not found");
    if (response.status != 200)
        throw Error(ErrorKind::NetworkError, what + ": HTTP " + std::to_string(response.status));
    try {
        return nlohmann::json::parse(response.body);
    } catch (const nlohmann::json::exception &e) {
        throw Error(ErrorKind::ParseError, what + ": " + e.what());
    }
}

PaperRecord SemanticScholarClient::fetch_paper(const std::string &lookup, Timestamp retrieved_at) {
    return paper_from_s2_json(get_json(paper_url(lookup), "paper " + lookup), retrieved_at);
}

PaperRecord SemanticScholarClient::match_title(const std::string &title, Timestamp retrieved_at) {
    const auto json = get_json(title_match_url(title), "title match '" + title + "'");
    const auto data = json.find("data");
    if (data == json.end() || !data->is_array() || data->empty())
        throw Error(ErrorKind::UnknownPaper, "no title match for '" + title + "'");
    PaperRecord record = paper_from_s2_json(data->front(), retrieved_at);
    record.id_join = "title";
    return record;
}

PaperRecord SemanticScholarClient::enrich(const PaperRecord &record, Timestamp retrieved_at) {
    PaperRecord found;
    std::string join;
    bool resolved = false;
    if (const auto it = record.external_ids.find("arxiv"); it != record.external_ids.end()) {
        try {
            found = fetch_paper("arXiv:" + it->second, retrieved_at);
            join = "arxiv";
            resolved = true;
        } catch (const Error &e) {
            if (e.kind() != ErrorKind::UnknownPaper)
                throw;
        }
    }
    if (!resolved) {
        if (const auto it = record.external_ids.find("doi"); it != record.external_ids.end()) {
            try {
                found = fetch_paper("DOI:" + it->second, retrieved_at);
                join = "doi";
                resolved = true;
            } catch (const Error &e) {
                if (e.kind() != ErrorKind::UnknownPaper)
                    throw;
            }
        }
    }
    if (!resolved) {
        if (record.title.empty())
            throw Error(ErrorKind::UnknownPaper, record.canonical_id + " has no joinable identifier");
        found = match_title(record.title, retrieved_at);
        join = "title";
    }

    PaperRecord merged = record;
    for (const auto &[source, id] : found.external_ids)
        merged.external_ids.emplace(source, id);
    if (merged.title.empty())
        merged.title = found.title;
    if (merged.abstract.empty())
        merged.abstract = found.abstract;
    if (!merged.publication_date)
        merged.publication_date = found.publication_date;
    if (found.venue)
        merged.venue = found.venue;
    merged.citation_count = found.citation_count ? found.citation_count : std::optional<std::int64_t>{0};
    if (found.author_count > 0)
        merged.author_count = found.author_count;
    merged.retrieved_at = retrieved_at;
    merged.id_join = join;
    return merged;
}

std::vector<PaperRecord> SemanticScholarClient::fetch_references(const std::string &lookup, Timestamp retrieved_at) {
    std::vector<PaperRecord> references;
    int offset = 0;
    while (true) {
        const auto page = get_json(references_url(lookup, offset), "references of " + lookup);
        const auto data = page.find("data");
        if (data == page.end() || !data->is_array())
            throw Error(ErrorKind::ParseError, "references of " + lookup + ": missing data array");
        for (const auto &item : *data) {
            const auto cited = item.find("citedPaper");
            if (cited == item.end() || !cited->is_object())
                continue;
            try {
                references.push_back(paper_from_s2_json(*cited, retrieved_at));
            } catch (const Error &) {
                // references S2 could not resolve carry no identifier at all
            }
        }
        const auto next = page.find("next");
        if (next == page.end() || !next->is_number_integer() || data->empty())
            break;
        offset = next->get<int>();
    }
    return references;
}

std::vector<CitingPaper> SemanticScholarClient::fetch_citing_papers(const std::string &lookup) {
    std::vector<CitingPaper> citing;
    int offset = 0;
    while (true) {
        const auto page = get_json(citations_url(lookup, offset), "citations of " + lookup);
        const auto data = page.find("data");
        if (data == page.end() || !data->is_array())
            throw Error(ErrorKind::ParseError, "citations of " + lookup + ": missing data array");
        for (const auto &item : *data) {
            const auto paper = item.find("citingPaper");
            if (paper == item.end() || !paper->is_object())
                continue;
            citing.push_back({string_or_empty(*paper, "paperId"), parse_date(string_or_empty(*paper, "publicationDate"))});
        }
        const auto next = page.find("next");
        if (next == page.end() || !next->is_number_integer() || data->empty())
            break;
        offset = next->get<int>();
    }
    return citing;
}

TopicContext SemanticScholarClient::fetch_topic_sample(const std::string &keyword, std::int64_t k,
                                                       Timestamp fetched_at) {
    if (k < 1)
        throw Error(ErrorKind::InvalidArgument, "topic sample size k must be at least 1");
    if (keyword.empty())
        throw Error(ErrorKind::EmptyKeyword, "topic sample needs a keyword");
    TopicContext topic;
    topic.keyword = keyword;
    topic.k = k;
    topic.fetched_at = fetched_at;
    topic.provenance = "GET /paper/search relevance ranking, fields=citationCount, page size " +
                       std::to_string(kSearchPageSize) + ", k=" + std::to_string(k);
    std::int64_t offset = 0;
    while (offset < k) {
        const int limit = static_cast<int>(std::min<std::int64_t>(kSearchPageSize, k - offset));
        const auto page = get_json(search_url(keyword, static_cast<int>(offset), limit), "search '" + keyword + "'");
        const auto data = page.find("data");
        if (data == page.end() || !data->is_array() || data->empty())
            break;
        for (const auto &hit : *data) {
            if (static_cast<std::int64_t>(topic.sample_citation_counts.size()) >= k)
                break;
            const auto cc = hit.find("citationCount");
            if (cc != hit.end() && cc->is_number_integer() && cc->get<std::int64_t>() >= 0)
                topic.sample_citation_counts.push_back(cc->get<std::int64_t>());
        }
        offset += static_cast<std::int64_t>(data->size());
        const auto next = page.find("next");
        if (next == page.end() || !next->is_number_integer())
            break;
    }
    if (topic.sample_citation_counts.empty())
        throw Error(ErrorKind::EmptyResult, "no search hits for '" + keyword + "'; TNCSI uncomputable");
    return topic;
}

std::int64_t SemanticScholarClient::count_relevant(const std::string &keyword, const Date &from, const Date &to) {
    if (from > to)
        throw Error(ErrorKind::InvalidDateRange, format_date(from) + " is after " + format_date(to));
    if (from == to)
        return 0;
    const Date to_inclusive = add_days(to, -1);
    std::int64_t count = 0;
    std::string token;
    while (true) {
        const auto page = get_json(bulk_search_url(keyword, from, to_inclusive, token), "bulk search '" + keyword + "'");
        const auto data = page.find("data");
        if (data == page.end() || !data->is_array())
            break;
        for (const auto &hit : *data) {
            const auto date = parse_date(string_or_empty(hit, "publicationDate"));
            if (date && *date >= from && *date < to)
                ++count;
        }
        const auto next = page.find("token");
        if (next == page.end() || !next->is_string() || next->get<std::string>().empty() || data->empty())
            break;
        token = next->get<std::string>();
    }
    return count;
}

MonthlyCitations SemanticScholarClient::fetch_monthly_citations(const std::string &lookup, int window_months,
                                                                const Date &today) {
    return bucket_monthly_citations(fetch_citing_papers(lookup), window_months, today);
}

} // namespace revmetrics::retrieval
