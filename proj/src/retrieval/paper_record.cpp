#include "revmetrics/retrieval/paper_record.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

#include "revmetrics/error.hpp"

namespace revmetrics::retrieval {

void validate(const PaperRecord &record) {
    if (record.canonical_id.empty())
        throw Error(ErrorKind::InvalidArgument, "paper record without canonical id");
    if (record.publication_date && record.retrieved_at != Timestamp{} &&
        *record.publication_date > date_of(record.retrieved_at))
        throw Error(ErrorKind::InvalidArgument, record.canonical_id + ": publication date " +
                                                    format_date(*record.publication_date) +
                                                    " after retrieval date");
    if (record.citation_count && *record.citation_count < 0)
        throw Error(ErrorKind::InvalidArgument, record.canonical_id + ": negative citation count");
}

std::string arxiv_canonical_id(const std::string &arxiv_id) { return "arxiv:" + normalize_arxiv_id(arxiv_id); }

std::string doi_canonical_id(const std::string &doi) {
    std::string lowered = doi;
    std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return "doi:" + lowered;
}

std::string s2_canonical_id(const std::string &paper_id) { return "s2:" + paper_id; }

std::string normalize_arxiv_id(std::string raw) {
    static const std::regex prefix(R"(^https?://(export\.)?arxiv\.org/abs/)", std::regex::icase);
    static const std::regex version(R"(v\d+$)");
    raw = std::regex_replace(raw, prefix, "");
    return std::regex_replace(raw, version, "");
}

nlohmann::json to_json(const PaperRecord &record) {
    nlohmann::json out = nlohmann::json::object();
    out["canonical_id"] = record.canonical_id;
    out["external_ids"] = record.external_ids;
    out["title"] = record.title;
    out["abstract"] = record.abstract;
    out["publication_date"] = record.publication_date ? nlohmann::json(format_date(*record.publication_date)) : nullptr;
    out["venue"] = record.venue ? nlohmann::json(*record.venue) : nullptr;
    out["citation_count"] = record.citation_count ? nlohmann::json(*record.citation_count) : nullptr;
    out["reference_ids"] = record.reference_ids;
    out["author_count"] = record.author_count;
    out["retrieved_at"] = format_timestamp(record.retrieved_at);
    out["id_join"] = record.id_join;
    return out;
}

PaperRecord paper_from_json(const nlohmann::json &json) {
    try {
        PaperRecord r;
        r.canonical_id = json.at("canonical_id").get<std::string>();
        r.external_ids = json.value("external_ids", std::map<std::string, std::string>{});
        r.title = json.value("title", std::string{});
        r.abstract = json.value("abstract", std::string{});
        if (const auto it = json.find("publication_date"); it != json.end() && !it->is_null()) {
            r.publication_date = parse_date(it->get<std::string>());
            if (!r.publication_date)
                throw Error(ErrorKind::ParseError, "bad publication_date '" + it->get<std::string>() + "'");
        }
        if (const auto it = json.find("venue"); it != json.end() && !it->is_null())
            r.venue = it->get<std::string>();
        if (const auto it = json.find("citation_count"); it != json.end() && !it->is_null())
            r.citation_count = it->get<std::int64_t>();
        r.reference_ids = json.value("reference_ids", std::vector<std::string>{});
        r.author_count = json.value("author_count", std::int64_t{0});
        if (const auto it = json.find("retrieved_at"); it != json.end() && !it->is_null()) {
            const auto ts = parse_timestamp(it->get<std::string>());
            if (!ts)
                throw Error(ErrorKind::ParseError, "bad retrieved_at");
            r.retrieved_at = *ts;
        }
        r.id_join = json.value("id_join", std::string{});
        return r;
    } catch (const nlohmann::json::exception &e) {
        throw Error(ErrorKind::ParseError, std::string("paper record: ") + e.what());
    }
}

} // namespace revmetrics::retrieval
