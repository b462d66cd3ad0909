#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "revmetrics/retrieval/semantic_scholar.hpp"

namespace revmetrics::retrieval {

/// Handle to one paper whose metadata, references and citing papers are each
/// fetched on first access and at most once. Construction performs no requests.
/// A failed fetch is retried on the next access.
class LazyPaper {
public:
    LazyPaper(std::shared_ptr<SemanticScholarClient> client, std::string lookup, Timestamp retrieved_at);

    const std::string &lookup() const { return lookup_; }

    const PaperRecord &record();
    const std::vector<PaperRecord> &references();
    const std::vector<CitingPaper> &citing_papers();

private:
    std::shared_ptr<SemanticScholarClient> client_;
    std::string lookup_;
    Timestamp retrieved_at_;

    std::once_flag record_once_;
    std::once_flag references_once_;
    std::once_flag citing_once_;
    PaperRecord record_;
    std::vector<PaperRecord> references_;
    std::vector<CitingPaper> citing_;
};

} // namespace revmetrics::retrieval
