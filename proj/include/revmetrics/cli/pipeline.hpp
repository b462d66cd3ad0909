#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "revmetrics/calendar.hpp"
#include "revmetrics/core/indicator_report.hpp"
#include "revmetrics/core/reference_quality.hpp"
#include "revmetrics/retrieval/llm.hpp"
#include "revmetrics/retrieval/semantic_scholar.hpp"
#include "revmetrics/snapshot/snapshot.hpp"

namespace revmetrics::cli {

inline constexpr int kDefaultIeiWindowMonths = 6;
inline constexpr std::int64_t kDefaultTopicSampleSize = 1000;

struct IndicatorSelection {
    bool tncsi = true;
    bool iei = true;
    bool rqm = true;
    bool rui = true;
};

struct ScoreOptions {
    IndicatorSelection selection;
    /// Frozen "current" date for IEI bucketing and RUI.
    Date today{};
    Timestamp computed_at{};
    double beta = core::kDefaultBeta;
    int iei_window_months = kDefaultIeiWindowMonths;
};

/// Lower median publication date of the stored references of `record`.
std::optional<Date> median_reference_date(snapshot::Snapshot &snap, const retrieval::PaperRecord &record);

/// Computes the selected indicators from snapshot data only. Indicators that
/// cannot be computed are left empty and described in `errors` as
/// "<Kind>: <INDICATOR> uncomputable (<detail>)". Throws UnknownPaper.
core::IndicatorReport score_paper(snapshot::Snapshot &snap, const std::string &paper_id, const ScoreOptions &options);

struct EnrichOptions {
    Date today{};
    Timestamp retrieved_at{};
    std::int64_t topic_sample_size = kDefaultTopicSampleSize;
    retrieval::LlmPromptProfile profile = retrieval::default_topic_profile();
    /// Recorded as the topic source when the LLM answers.
    std::string llm_source = "llm";
};

struct EnrichSummary {
    std::string paper_id;
    std::string topic_keyword;
    std::string topic_source;
    std::size_t references = 0;
    std::size_t citing = 0;
    std::size_t topic_sample = 0;
    std::vector<std::string> warnings;
};

/// Fetches everything `score_paper` needs: S2 metadata, references, a topic
/// keyword, its citation sample, citing papers and the two relevance counts.
/// An existing topic assignment or topic sample is reused.
EnrichSummary enrich_paper(snapshot::Snapshot &snap, retrieval::SemanticScholarClient &s2, retrieval::LlmClient &llm,
                           const std::string &paper_id, const EnrichOptions &options);

} // namespace revmetrics::cli
