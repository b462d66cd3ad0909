#include "revmetrics/retrieval/lazy_paper.hpp"

namespace revmetrics::retrieval {

LazyPaper::LazyPaper(std::shared_ptr<SemanticScholarClient> client, std::string lookup, Timestamp retrieved_at)
    : client_(std::move(client)), lookup_(std::move(lookup)), retrieved_at_(retrieved_at) {}

const PaperRecord &LazyPaper::record() {
    std::call_once(record_once_, [this] { record_ = client_->fetch_paper(lookup_, retrieved_at_); });
    return record_;
}

const std::vector<PaperRecord> &LazyPaper::references() {
    std::call_once(references_once_, [this] { references_ = client_->fetch_references(lookup_, retrieved_at_); });
    return references_;
}

const std::vector<CitingPaper> &LazyPaper::citing_papers() {
    std::call_once(citing_once_, [this] { citing_ = client_->fetch_citing_papers(lookup_); });
    return citing_;
}

} // namespace revmetrics::retrieval
