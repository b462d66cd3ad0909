#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "revmetrics/calendar.hpp"

namespace revmetrics::retrieval {

/// Metadata for one scholarly document as stored in a snapshot.
struct PaperRecord {
    std::string canonical_id;
    /// source -> id; keys are "arxiv", "doi", "s2".
    std::map<std::string, std::string> external_ids;
    std::string title;
    std::string abstract;
    std::optional<Date> publication_date;
    std::optional<std::string> venue;
    /// Absent for sources that carry no citation data (arXiv).
    std::optional<std::int64_t> citation_count;
    std::vector<std::string> reference_ids;
    std::int64_t author_count = 0;
    Timestamp retrieved_at{};
    /// How the record was joined across sources: "arxiv", "doi", "title" (low
    /// confidence) or empty when it came from a single source.
    std::string id_join;

    bool operator==(const PaperRecord &) const = default;
};

/// Throws InvalidArgument when canonical_id is empty or the publication date
/// lies after the retrieval date.
void validate(const PaperRecord &record);

/// Canonical ids: "arxiv:<id>", "doi:<lowercased doi>", "s2:<paperId>".
std::string arxiv_canonical_id(const std::string &arxiv_id);
std::string doi_canonical_id(const std::string &doi);
std::string s2_canonical_id(const std::string &paper_id);

/// Strips an "http(s)://arxiv.org/abs/" prefix and a trailing version suffix.
std::string normalize_arxiv_id(std::string raw);

nlohmann::json to_json(const PaperRecord &record);
/// Throws ParseError.
PaperRecord paper_from_json(const nlohmann::json &json);

} // namespace revmetrics::retrieval
