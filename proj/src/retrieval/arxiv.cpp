#include "revmetrics/retrieval/arxiv.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "revmetrics/error.hpp"

namespace revmetrics::retrieval {

namespace {

std::string ascii_lower(std::string text) {
    std::transform(text.begin(), text.end(), text.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return text;
}

std::string collapse_whitespace(const std::string &text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (const char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space)
            out.push_back(' ');
        pending_space = false;
        out.push_back(c);
    }
    return out;
}

} // namespace

std::string arxiv_review_query(const std::string &keyword) {
    if (keyword.find_first_not_of(" \t\r\n") == std::string::npos)
        throw Error(ErrorKind::EmptyKeyword, "arXiv query needs a keyword");
    const std::string kw = ascii_lower(keyword);
    return R"((ti:"review" OR ti:"survey") AND (ti:")" + kw + R"(" OR abs:")" + kw + R"("))";
}

bool abstract_mentions(const std::string &abstract, const std::string &keyword) {
    const std::string kw = ascii_lower(collapse_whitespace(keyword));
    if (kw.empty())
        return false;
    return ascii_lower(collapse_whitespace(abstract)).find(kw) != std::string::npos;
}

std::vector<PaperRecord> parse_arxiv_feed(const std::string &xml, Timestamp retrieved_at) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        std::istringstream in(xml);
        pt::read_xml(in, tree);
    } catch (const pt::xml_parser_error &e) {
        throw Error(ErrorKind::ParseError, std::string("arXiv feed: ") + e.what());
    }
    const auto feed = tree.get_child_optional("feed");
    if (!feed)
        throw Error(ErrorKind::ParseError, "arXiv feed: missing <feed> root");

    std::vector<PaperRecord> records;
    for (const auto &[name, entry] : *feed) {
        if (name != "entry")
            continue;
        const std::string raw_id = entry.get<std::string>("id", "");
        if (raw_id.find("api/errors") != std::string::npos)
            throw Error(ErrorKind::ParseError, "arXiv API error: " + collapse_whitespace(entry.get<std::string>("summary", "")));
        if (raw_id.empty())
            throw Error(ErrorKind::ParseError, "arXiv feed: entry without <id>");

        PaperRecord record;
        const std::string arxiv_id = normalize_arxiv_id(collapse_whitespace(raw_id));
        record.canonical_id = arxiv_canonical_id(arxiv_id);
        record.external_ids["arxiv"] = arxiv_id;
        if (const auto doi = entry.get_optional<std::string>("arxiv:doi"))
            record.external_ids["doi"] = collapse_whitespace(*doi);
        record.title = collapse_whitespace(entry.get<std::string>("title", ""));
        record.abstract = collapse_whitespace(entry.get<std::string>("summary", ""));
        record.publication_date = parse_date(collapse_whitespace(entry.get<std::string>("published", "")));
        if (const auto journal = entry.get_optional<std::string>("arxiv:journal_ref"))
            record.venue = collapse_whitespace(*journal);
        record.author_count = static_cast<std::int64_t>(
            std::count_if(entry.begin(), entry.end(), [](const auto &child) { return child.first == "author"; }));
        record.retrieved_at = retrieved_at;
        record.id_join = "arxiv";
        records.push_back(std::move(record));
    }
    return records;
}

ArxivClient::ArxivClient(std::shared_ptr<Fetcher> fetcher, std::string base_url)
    : fetcher_(std::move(fetcher)), base_url_(std::move(base_url)) {}

std::string ArxivClient::page_url(const std::string &keyword, int start, int max_results) const {
    return base_url_ + "?search_query=" + url_encode(arxiv_review_query(keyword)) + "&start=" + std::to_string(start) +
           "&max_results=" + std::to_string(max_results);
}

std::vector<PaperRecord> ArxivClient::fetch_candidates(const std::string &keyword, int limit, Timestamp retrieved_at) {
    const std::string query = arxiv_review_query(keyword); // validates before any request
    (void)query;
    std::vector<PaperRecord> hits;
    int start = 0;
    while (start < limit) {
        const int page = std::min(kPageSize, limit - start);
        const HttpResponse response = fetcher_->fetch(HttpRequest{"GET", page_url(keyword, start, page), {}, ""});
        if (response.status != 200)
            throw Error(ErrorKind::NetworkError, "arXiv returned HTTP " + std::to_string(response.status));
        auto records = parse_arxiv_feed(response.body, retrieved_at);
        const auto received = static_cast<int>(records.size());
        for (auto &r : records)
            hits.push_back(std::move(r));
        start += received;
        if (received < page)
            break;
    }
    std::vector<PaperRecord> matching;
    for (auto &r : hits)
        if (abstract_mentions(r.abstract, keyword))
            matching.push_back(std::move(r));
    return matching;
}

} // namespace revmetrics::retrieval
