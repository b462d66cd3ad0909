#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "revmetrics/calendar.hpp"
#include "revmetrics/core/indicator_report.hpp"
#include "revmetrics/retrieval/fetcher.hpp"
#include "revmetrics/retrieval/paper_record.hpp"
#include "revmetrics/retrieval/semantic_scholar.hpp"

struct sqlite3;

namespace revmetrics::snapshot {

inline constexpr int kSchemaVersion = 1;

struct SnapshotMeta {
    int schema_version = kSchemaVersion;
    Timestamp created_at{};
    std::string source_notes;
};

/// Binary content features of one review.
struct FeatureVector {
    int taxonomy = 0;
    int prisma = 0;
    int preliminary = 0;
    int benchmark = 0;
    int application = 0;
    int discussion = 0;
    int structured_abstract = 0;

    bool operator==(const FeatureVector &) const = default;
};

/// Feature names in storage order.
const std::vector<std::string> &feature_names();
/// Value of a feature by name. Throws InvalidArgument for unknown names.
int feature_value(const FeatureVector &fv, const std::string &name);
/// Throws InvalidArgument when any field is outside {0,1}.
void validate(const FeatureVector &fv);
nlohmann::json to_json(const FeatureVector &fv);
/// Throws ParseError.
FeatureVector features_from_json(const nlohmann::json &json);

struct StoredFeatures {
    FeatureVector features;
    Timestamp stored_at{};
};

struct ReviewEntry {
    std::string paper_id;
    std::string harvest_keyword;
    Timestamp added_at{};
};

/// Topic keyword used to normalize a review's citations. `source` records how
/// it was obtained: "llm", "stub", "manual" or "harvest".
struct TopicAssignment {
    std::string paper_id;
    std::string keyword;
    std::string source;
};

struct CitationHistory {
    std::string paper_id;
    Timestamp fetched_at{};
    std::vector<retrieval::CitingPaper> citing;
};

struct RelevanceCount {
    std::string keyword;
    Date from{};
    Date to{};
    std::int64_t count = 0;
    Timestamp fetched_at{};
};

struct ImportResult {
    std::size_t imported = 0;
    std::size_t corrupt = 0;
    /// "line N: reason" for every skipped line.
    std::vector<std::string> problems;
};

/// Record kinds written by export_jsonl, in export order.
const std::vector<std::string> &record_kinds();

enum class OpenMode { ReadWrite, ReadOnly };

/// Single-file SQLite snapshot. All access is serialized through one
/// connection; writes in ReadOnly mode throw StorageError.
class Snapshot {
public:
    /// Opens or, in ReadWrite mode, creates the file. `created_at` stamps a new
    /// snapshot. Throws StorageError, SchemaMismatch.
    static std::unique_ptr<Snapshot> open(const std::filesystem::path &path, OpenMode mode = OpenMode::ReadWrite,
                                          std::optional<Timestamp> created_at = std::nullopt,
                                          const std::string &source_notes = {});
    ~Snapshot();
    Snapshot(const Snapshot &) = delete;
    Snapshot &operator=(const Snapshot &) = delete;

    SnapshotMeta meta();
    bool read_only() const { return mode_ == OpenMode::ReadOnly; }
    const std::filesystem::path &path() const { return path_; }

    /// Insert or replace keyed by canonical_id. Throws InvalidArgument for
    /// records failing validation.
    std::string upsert_paper(const retrieval::PaperRecord &record);
    std::optional<retrieval::PaperRecord> paper(const std::string &id);
    /// Throws UnknownPaper.
    retrieval::PaperRecord require_paper(const std::string &id);
    std::vector<std::string> paper_ids();
    std::size_t paper_count();
    /// (paper, reference) pairs whose reference is not stored.
    std::vector<std::pair<std::string, std::string>> dangling_references();

    void add_review(const ReviewEntry &entry);
    std::vector<ReviewEntry> reviews();
    bool is_review(const std::string &id);

    void set_topic(const TopicAssignment &topic);
    std::optional<TopicAssignment> topic(const std::string &paper_id);

    void put_topic_sample(const retrieval::TopicContext &topic);
    std::optional<retrieval::TopicContext> topic_sample(const std::string &keyword);

    /// Replaces the stored citing papers of one paper.
    void put_citations(const CitationHistory &history);
    std::optional<CitationHistory> citations(const std::string &paper_id);

    void put_relevance_count(const RelevanceCount &count);
    std::optional<RelevanceCount> relevance_count(const std::string &keyword, const Date &from, const Date &to);

    /// Appends a report version. Throws UnknownPaper.
    void store_report(const std::string &paper_id, const core::IndicatorReport &report);
    /// Version with the latest computed_at (ties: the later append).
    std::optional<core::IndicatorReport> latest_report(const std::string &paper_id);
    std::vector<core::IndicatorReport> report_history(const std::string &paper_id);

    /// Appends a feature version. Throws UnknownPaper, InvalidArgument.
    void store_features(const std::string &paper_id, const FeatureVector &fv, Timestamp stored_at);
    std::optional<StoredFeatures> latest_features(const std::string &paper_id);

    std::optional<std::string> cache_get(const std::string &key);
    void cache_put(const std::string &key, const std::string &body);

    /// Canonical JSON lines {"kind": ..., "data": ...}, kinds in record_kinds()
    /// order, rows in key order. An empty `kinds` set exports everything.
    /// Returns the number of lines written.
    std::size_t export_jsonl(std::ostream &out, const std::set<std::string> &kinds = {});
    /// Imports lines in one transaction; unreadable lines are skipped and tallied.
    ImportResult import_jsonl(std::istream &in);

private:
    Snapshot(sqlite3 *db, std::filesystem::path path, OpenMode mode);

    void require_writable() const;
    void exec(const std::string &sql);
    bool paper_exists_locked(const std::string &id);
    void upsert_paper_locked(const retrieval::PaperRecord &record);
    std::optional<retrieval::PaperRecord> paper_locked(const std::string &id);
    void import_line_locked(const nlohmann::json &line);

    sqlite3 *db_;
    std::filesystem::path path_;
    OpenMode mode_;
    std::recursive_mutex mutex_;
};

/// Response cache persisted in a snapshot's http_cache table.
class SnapshotResponseCache : public retrieval::ResponseCache {
public:
    explicit SnapshotResponseCache(std::shared_ptr<Snapshot> snapshot) : snapshot_(std::move(snapshot)) {}
    std::optional<std::string> get(const std::string &key) override { return snapshot_->cache_get(key); }
    void put(const std::string &key, const std::string &body) override;

private:
    std::shared_ptr<Snapshot> snapshot_;
};

} // namespace revmetrics::snapshot
