#include "revmetrics/snapshot/snapshot.hpp"

#include <array>
#include <istream>
#include <ostream>

#include <sqlite3.h>

#include "revmetrics/error.hpp"

namespace revmetrics::snapshot {

namespace {

using retrieval::CitingPaper;
using retrieval::PaperRecord;
using retrieval::TopicContext;
using nlohmann::json;

constexpr const char *kSchema = R"sql(
CREATE TABLE meta (
  key   TEXT PRIMARY KEY,
  value TEXT NOT NULL
);
CREATE TABLE papers (
  canonical_id     TEXT PRIMARY KEY,
  title            TEXT NOT NULL,
  abstract         TEXT NOT NULL,
  publication_date TEXT,
  venue            TEXT,
  citation_count   INTEGER CHECK (citation_count IS NULL OR citation_count >= 0),
  author_count     INTEGER NOT NULL CHECK (author_count >= 0),
  retrieved_at     TEXT NOT NULL,
  id_join          TEXT NOT NULL
);
CREATE TABLE paper_ids (
  paper_id    TEXT NOT NULL REFERENCES papers(canonical_id) ON DELETE CASCADE,
  source      TEXT NOT NULL,
  external_id TEXT NOT NULL,
  PRIMARY KEY (paper_id, source)
);
CREATE TABLE paper_refs (
  paper_id TEXT NOT NULL REFERENCES papers(canonical_id) ON DELETE CASCADE,
  ord      INTEGER NOT NULL,
  ref_id   TEXT NOT NULL,
  PRIMARY KEY (paper_id, ord)
);
CREATE TABLE reviews (
  paper_id        TEXT PRIMARY KEY REFERENCES papers(canonical_id),
  harvest_keyword TEXT NOT NULL,
  added_at        TEXT NOT NULL
);
CREATE TABLE topics (
  paper_id TEXT PRIMARY KEY REFERENCES papers(canonical_id),
  keyword  TEXT NOT NULL,
  source   TEXT NOT NULL
);
CREATE TABLE topic_samples (
  keyword     TEXT PRIMARY KEY,
  k           INTEGER NOT NULL,
  counts_json TEXT NOT NULL,
  fetched_at  TEXT NOT NULL,
  provenance  TEXT NOT NULL
);
CREATE TABLE citation_fetches (
  paper_id   TEXT PRIMARY KEY REFERENCES papers(canonical_id),
  fetched_at TEXT NOT NULL
);
CREATE TABLE citations (
  paper_id    TEXT NOT NULL REFERENCES citation_fetches(paper_id) ON DELETE CASCADE,
  ord         INTEGER NOT NULL,
  citing_id   TEXT NOT NULL,
  citing_date TEXT,
  PRIMARY KEY (paper_id, ord)
);
CREATE TABLE relevance_counts (
  keyword    TEXT NOT NULL,
  from_date  TEXT NOT NULL,
  to_date    TEXT NOT NULL,
  count      INTEGER NOT NULL CHECK (count >= 0),
  fetched_at TEXT NOT NULL,
  PRIMARY KEY (keyword, from_date, to_date)
);
CREATE TABLE reports (
  seq         INTEGER PRIMARY KEY AUTOINCREMENT,
  paper_id    TEXT NOT NULL REFERENCES papers(canonical_id),
  computed_at TEXT NOT NULL,
  json        TEXT NOT NULL
);
CREATE INDEX reports_by_paper ON reports(paper_id, computed_at, seq);
CREATE TABLE features (
  seq                 INTEGER PRIMARY KEY AUTOINCREMENT,
  paper_id            TEXT NOT NULL REFERENCES papers(canonical_id),
  stored_at           TEXT NOT NULL,
  taxonomy            INTEGER NOT NULL CHECK (taxonomy IN (0, 1)),
  prisma              INTEGER NOT NULL CHECK (prisma IN (0, 1)),
  preliminary         INTEGER NOT NULL CHECK (preliminary IN (0, 1)),
  benchmark           INTEGER NOT NULL CHECK (benchmark IN (0, 1)),
  application         INTEGER NOT NULL CHECK (application IN (0, 1)),
  discussion          INTEGER NOT NULL CHECK (discussion IN (0, 1)),
  structured_abstract INTEGER NOT NULL CHECK (structured_abstract IN (0, 1))
);
CREATE TABLE http_cache (
  key  TEXT PRIMARY KEY,
  body TEXT NOT NULL
);
)sql";

class Statement {
public:
    Statement(sqlite3 *db, const std::string &sql) : db_(db) {
        if (sqlite3_prepare_v2(db, sql.c_str(), static_cast<int>(sql.size()), &stmt_, nullptr) != SQLITE_OK)
            throw Error(ErrorKind::StorageError, std::string("prepare: ") + sqlite3_errmsg(db));
    }
    ~Statement() { sqlite3_finalize(stmt_); }
    Statement(const Statement &) = delete;
    Statement &operator=(const Statement &) = delete;

    Statement &bind(int index, const std::string &value) {
        check(sqlite3_bind_text(stmt_, index, value.data(), static_cast<int>(value.size()), SQLITE_TRANSIENT));
        return *this;
    }
    Statement &bind(int index, std::int64_t value) {
        check(sqlite3_bind_int64(stmt_, index, value));
        return *this;
    }
    Statement &bind(int index, int value) { return bind(index, static_cast<std::int64_t>(value)); }
    Statement &bind_null(int index) {
        check(sqlite3_bind_null(stmt_, index));
        return *this;
    }
    template <typename T>
    Statement &bind(int index, const std::optional<T> &value) {
        return value ? bind(index, *value) : bind_null(index);
    }

    /// True while a row is available.
    bool step() {
        const int rc = sqlite3_step(stmt_);
        if (rc == SQLITE_ROW)
            return true;
        if (rc == SQLITE_DONE)
            return false;
        throw Error(ErrorKind::StorageError, sqlite3_errmsg(db_));
    }
    void run() {
        while (step()) {
        }
    }

    bool is_null(int col) const { return sqlite3_column_type(stmt_, col) == SQLITE_NULL; }
    std::string text(int col) const {
        const auto *p = reinterpret_cast<const char *>(sqlite3_column_text(stmt_, col));
        return p ? std::string(p, static_cast<std::size_t>(sqlite3_column_bytes(stmt_, col))) : std::string{};
    }
    std::optional<std::string> optional_text(int col) const {
        return is_null(col) ? std::nullopt : std::optional<std::string>(text(col));
    }
    std::int64_t integer(int col) const { return sqlite3_column_int64(stmt_, col); }

private:
    void check(int rc) {
        if (rc != SQLITE_OK)
            throw Error(ErrorKind::StorageError, std::string("bind: ") + sqlite3_errmsg(db_));
    }

    sqlite3 *db_;
    sqlite3_stmt *stmt_ = nullptr;
};

Timestamp timestamp_column(const std::string &text) {
    const auto ts = parse_timestamp(text);
    if (!ts)
        throw Error(ErrorKind::StorageError, "bad stored timestamp '" + text + "'");
    return *ts;
}

Date date_column(const std::string &text) {
    const auto d = parse_date(text);
    if (!d)
        throw Error(ErrorKind::StorageError, "bad stored date '" + text + "'");
    return *d;
}

std::optional<std::string> optional_date_text(const std::optional<Date> &d) {
    return d ? std::optional<std::string>(format_date(*d)) : std::nullopt;
}

Timestamp json_timestamp(const json &j, const char *key) {
    const auto ts = parse_timestamp(j.at(key).get<std::string>());
    if (!ts)
        throw Error(ErrorKind::ParseError, std::string("bad timestamp in '") + key + "'");
    return *ts;
}

Date json_date(const json &j, const char *key) {
    const auto d = parse_date(j.at(key).get<std::string>());
    if (!d)
        throw Error(ErrorKind::ParseError, std::string("bad date in '") + key + "'");
    return *d;
}

json line(const std::string &kind, json data) { return json{{"kind", kind}, {"data", std::move(data)}}; }

} // namespace

const std::vector<std::string> &feature_names() {
    static const std::vector<std::string> names{"taxonomy",   "prisma",     "preliminary",        "benchmark",
                                                "application", "discussion", "structured_abstract"};
    return names;
}

namespace {

std::array<int *, 7> feature_fields(FeatureVector &fv) {
    return {&fv.taxonomy, &fv.prisma, &fv.preliminary, &fv.benchmark, &fv.application, &fv.discussion,
            &fv.structured_abstract};
}

} // namespace

int feature_value(const FeatureVector &fv, const std::string &name) {
    FeatureVector copy = fv;
    const auto fields = feature_fields(copy);
    const auto &names = feature_names();
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name)
            return *fields[i];
    throw Error(ErrorKind::InvalidArgument, "unknown feature '" + name + "'");
}

void validate(const FeatureVector &fv) {
    FeatureVector copy = fv;
    const auto fields = feature_fields(copy);
    for (std::size_t i = 0; i < fields.size(); ++i)
        if (*fields[i] != 0 && *fields[i] != 1)
            throw Error(ErrorKind::InvalidArgument,
                        "feature " + feature_names()[i] + " must be 0 or 1, got " + std::to_string(*fields[i]));
}

json to_json(const FeatureVector &fv) {
    json out = json::object();
    for (const auto &name : feature_names())
        out[name] = feature_value(fv, name);
    return out;
}

FeatureVector features_from_json(const json &j) {
    FeatureVector fv;
    const auto fields = feature_fields(fv);
    try {
        for (std::size_t i = 0; i < fields.size(); ++i)
            *fields[i] = j.at(feature_names()[i]).get<int>();
    } catch (const json::exception &e) {
        throw Error(ErrorKind::ParseError, std::string("feature vector: ") + e.what());
    }
    try {
        validate(fv);
    } catch (const Error &e) {
        throw Error(ErrorKind::ParseError, e.detail());
    }
    return fv;
}

const std::vector<std::string> &record_kinds() {
    static const std::vector<std::string> kinds{"paper",     "review",          "topic",  "topic_sample",
                                                "citations", "relevance_count", "report", "features"};
    return kinds;
}

Snapshot::Snapshot(sqlite3 *db, std::filesystem::path path, OpenMode mode)
    : db_(db), path_(std::move(path)), mode_(mode) {}

Snapshot::~Snapshot() { sqlite3_close(db_); }

std::unique_ptr<Snapshot> Snapshot::open(const std::filesystem::path &path, OpenMode mode,
                                         std::optional<Timestamp> created_at, const std::string &source_notes) {
    if (mode == OpenMode::ReadOnly && !std::filesystem::exists(path))
        throw Error(ErrorKind::StorageError, "snapshot " + path.string() + " does not exist");
    const int flags = mode == OpenMode::ReadOnly ? SQLITE_OPEN_READONLY : SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE;
    sqlite3 *db = nullptr;
    if (sqlite3_open_v2(path.string().c_str(), &db, flags | SQLITE_OPEN_FULLMUTEX, nullptr) != SQLITE_OK) {
        const std::string message = db ? sqlite3_errmsg(db) : "out of memory";
        sqlite3_close(db);
        throw Error(ErrorKind::StorageError, "cannot open " + path.string() + ": " + message);
    }
    std::unique_ptr<Snapshot> snap(new Snapshot(db, path, mode));
    sqlite3_busy_timeout(db, 5000);
    snap->exec("PRAGMA foreign_keys = ON");

    bool has_meta = false;
    {
        Statement q(db, "SELECT count(*) FROM sqlite_master WHERE type = 'table' AND name = 'meta'");
        q.step();
        has_meta = q.integer(0) > 0;
    }
    if (!has_meta) {
        bool empty = true;
        {
            Statement q(db, "SELECT count(*) FROM sqlite_master");
            q.step();
            empty = q.integer(0) == 0;
        }
        if (mode == OpenMode::ReadOnly || !empty)
            throw Error(ErrorKind::SchemaMismatch, path.string() + " is not a snapshot");
        snap->exec("BEGIN");
        snap->exec(kSchema);
        const std::pair<std::string, std::string> rows[] = {
            {"schema_version", std::to_string(kSchemaVersion)},
            {"created_at", format_timestamp(created_at.value_or(now_utc()))},
            {"source_notes", source_notes}};
        for (const auto &[k, v] : rows) {
            Statement row(db, "INSERT INTO meta(key, value) VALUES (?, ?)");
            row.bind(1, k).bind(2, v).run();
        }
        snap->exec("COMMIT");
    }
    const int version = snap->meta().schema_version;
    if (version != kSchemaVersion)
        throw Error(ErrorKind::SchemaMismatch, path.string() + " has schema version " + std::to_string(version) +
                                                   ", expected " + std::to_string(kSchemaVersion));
    return snap;
}

void Snapshot::require_writable() const {
    if (mode_ == OpenMode::ReadOnly)
        throw Error(ErrorKind::StorageError, "snapshot " + path_.string() + " is open read-only");
}

void Snapshot::exec(const std::string &sql) {
    char *message = nullptr;
    if (sqlite3_exec(db_, sql.c_str(), nullptr, nullptr, &message) != SQLITE_OK) {
        const std::string detail = message ? message : "unknown error";
        sqlite3_free(message);
        throw Error(ErrorKind::StorageError, detail);
    }
}

SnapshotMeta Snapshot::meta() {
    std::lock_guard lock(mutex_);
    SnapshotMeta meta;
    meta.schema_version = -1;
    Statement q(db_, "SELECT key, value FROM meta");
    while (q.step()) {
        const std::string key = q.text(0);
        if (key == "schema_version")
            meta.schema_version = std::stoi(q.text(1));
        else if (key == "created_at")
            meta.created_at = timestamp_column(q.text(1));
        else if (key == "source_notes")
            meta.source_notes = q.text(1);
    }
    return meta;
}

bool Snapshot::paper_exists_locked(const std::string &id) {
    Statement q(db_, "SELECT 1 FROM papers WHERE canonical_id = ?");
    q.bind(1, id);
    return q.step();
}

void Snapshot::upsert_paper_locked(const PaperRecord &record) {
    retrieval::validate(record);
    Statement up(db_, R"sql(
        INSERT INTO papers(canonical_id, title, abstract, publication_date, venue, citation_count, author_count,
                           retrieved_at, id_join)
        VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?)
        ON CONFLICT(canonical_id) DO UPDATE SET
          title = excluded.title, abstract = excluded.abstract, publication_date = excluded.publication_date,
          venue = excluded.venue, citation_count = excluded.citation_count, author_count = excluded.author_count,
          retrieved_at = excluded.retrieved_at, id_join = excluded.id_join)sql");
    up.bind(1, record.canonical_id)
        .bind(2, record.title)
        .bind(3, record.abstract)
        .bind(4, optional_date_text(record.publication_date))
        .bind(5, record.venue)
        .bind(6, record.citation_count)
        .bind(7, record.author_count)
        .bind(8, format_timestamp(record.retrieved_at))
        .bind(9, record.id_join)
        .run();
    Statement(db_, "DELETE FROM paper_ids WHERE paper_id = ?").bind(1, record.canonical_id).run();
    Statement(db_, "DELETE FROM paper_refs WHERE paper_id = ?").bind(1, record.canonical_id).run();
    for (const auto &[source, id] : record.external_ids)
        Statement(db_, "INSERT INTO paper_ids(paper_id, source, external_id) VALUES (?, ?, ?)")
            .bind(1, record.canonical_id)
            .bind(2, source)
            .bind(3, id)
            .run();
    for (std::size_t i = 0; i < record.reference_ids.size(); ++i)
        Statement(db_, "INSERT INTO paper_refs(paper_id, ord, ref_id) VALUES (?, ?, ?)")
            .bind(1, record.canonical_id)
            .bind(2, static_cast<std::int64_t>(i))
            .bind(3, record.reference_ids[i])
            .run();
}

std::string Snapshot::upsert_paper(const PaperRecord &record) {
    std::lock_guard lock(mutex_);
    require_writable();
    exec("SAVEPOINT upsert");
    try {
        upsert_paper_locked(record);
    } catch (...) {
        exec("ROLLBACK TO upsert");
        exec("RELEASE upsert");
        throw;
    }
    exec("RELEASE upsert");
    return record.canonical_id;
}

std::optional<PaperRecord> Snapshot::paper_locked(const std::string &id) {
    Statement q(db_, "SELECT canonical_id, title, abstract, publication_date, venue, citation_count, author_count, "
                     "retrieved_at, id_join FROM papers WHERE canonical_id = ?");
    q.bind(1, id);
    if (!q.step())
        return std::nullopt;
    PaperRecord r;
    r.canonical_id = q.text(0);
    r.title = q.text(1);
    r.abstract = q.text(2);
    if (!q.is_null(3))
        r.publication_date = date_column(q.text(3));
    r.venue = q.optional_text(4);
    if (!q.is_null(5))
        r.citation_count = q.integer(5);
    r.author_count = q.integer(6);
    r.retrieved_at = timestamp_column(q.text(7));
    r.id_join = q.text(8);
    Statement ids(db_, "SELECT source, external_id FROM paper_ids WHERE paper_id = ?");
    ids.bind(1, id);
    while (ids.step())
        r.external_ids[ids.text(0)] = ids.text(1);
    Statement refs(db_, "SELECT ref_id FROM paper_refs WHERE paper_id = ? ORDER BY ord");
    refs.bind(1, id);
    while (refs.step())
        r.reference_ids.push_back(refs.text(0));
    return r;
}

std::optional<PaperRecord> Snapshot::paper(const std::string &id) {
    std::lock_guard lock(mutex_);
    return paper_locked(id);
}

PaperRecord Snapshot::require_paper(const std::string &id) {
    auto record = paper(id);
    if (!record)
        throw Error(ErrorKind::UnknownPaper, id + " is not in the snapshot");
    return *record;
}

std::vector<std::string> Snapshot::paper_ids() {
    std::lock_guard lock(mutex_);
    std::vector<std::string> ids;
    Statement q(db_, "SELECT canonical_id FROM papers ORDER BY canonical_id");
    while (q.step())
        ids.push_back(q.text(0));
    return ids;
}

std::size_t Snapshot::paper_count() {
    std::lock_guard lock(mutex_);
    Statement q(db_, "SELECT count(*) FROM papers");
    q.step();
    return static_cast<std::size_t>(q.integer(0));
}

std::vector<std::pair<std::string, std::string>> Snapshot::dangling_references() {
    std::lock_guard lock(mutex_);
    std::vector<std::pair<std::string, std::string>> out;
    Statement q(db_, "SELECT r.paper_id, r.ref_id FROM paper_refs r LEFT JOIN papers p ON p.canonical_id = r.ref_id "
                     "WHERE p.canonical_id IS NULL ORDER BY r.paper_id, r.ord");
    while (q.step())
        out.emplace_back(q.text(0), q.text(1));
    return out;
}

void Snapshot::add_review(const ReviewEntry &entry) {
    std::lock_guard lock(mutex_);
    require_writable();
    if (!paper_exists_locked(entry.paper_id))
        throw Error(ErrorKind::UnknownPaper, entry.paper_id + " is not in the snapshot");
    Statement(db_, "INSERT INTO reviews(paper_id, harvest_keyword, added_at) VALUES (?, ?, ?) "
                   "ON CONFLICT(paper_id) DO UPDATE SET harvest_keyword = excluded.harvest_keyword, "
                   "added_at = excluded.added_at")
        .bind(1, entry.paper_id)
        .bind(2, entry.harvest_keyword)
        .bind(3, format_timestamp(entry.added_at))
        .run();
}

std::vector<ReviewEntry> Snapshot::reviews() {
    std::lock_guard lock(mutex_);
    std::vector<ReviewEntry> out;
    Statement q(db_, "SELECT paper_id, harvest_keyword, added_at FROM reviews ORDER BY paper_id");
    while (q.step())
        out.push_back({q.text(0), q.text(1), timestamp_column(q.text(2))});
    return out;
}

bool Snapshot::is_review(const std::string &id) {
    std::lock_guard lock(mutex_);
    Statement q(db_, "SELECT 1 FROM reviews WHERE paper_id = ?");
    q.bind(1, id);
    return q.step();
}

void Snapshot::set_topic(const TopicAssignment &topic) {
    std::lock_guard lock(mutex_);
    require_writable();
    if (!paper_exists_locked(topic.paper_id))
        throw Error(ErrorKind::UnknownPaper, topic.paper_id + " is not in the snapshot");
    if (topic.keyword.empty())
        throw Error(ErrorKind::EmptyKeyword, "topic keyword for " + topic.paper_id + " is empty");
    Statement(db_, "INSERT INTO topics(paper_id, keyword, source) VALUES (?, ?, ?) "
                   "ON CONFLICT(paper_id) DO UPDATE SET keyword = excluded.keyword, source = excluded.source")
        .bind(1, topic.paper_id)
        .bind(2, topic.keyword)
        .bind(3, topic.source)
        .run();
}

std::optional<TopicAssignment> Snapshot::topic(const std::string &paper_id) {
    std::lock_guard lock(mutex_);
    Statement q(db_, "SELECT paper_id, keyword, source FROM topics WHERE paper_id = ?");
    q.bind(1, paper_id);
    if (!q.step())
        return std::nullopt;
    return TopicAssignment{q.text(0), q.text(1), q.text(2)};
}

void Snapshot::put_topic_sample(const TopicContext &topic) {
    std::lock_guard lock(mutex_);
    require_writable();
    if (topic.keyword.empty())
        throw Error(ErrorKind::EmptyKeyword, "topic sample without keyword");
    if (topic.k < 1 || topic.sample_citation_counts.empty() ||
        static_cast<std::int64_t>(topic.sample_citation_counts.size()) > topic.k)
        throw Error(ErrorKind::InvalidArgument, "topic sample for '" + topic.keyword + "' must hold 1..k counts");
    for (const auto c : topic.sample_citation_counts)
        if (c < 0)
            throw Error(ErrorKind::InvalidArgument, "negative citation count in topic sample");
    Statement(db_, "INSERT INTO topic_samples(keyword, k, counts_json, fetched_at, provenance) VALUES (?, ?, ?, ?, ?) "
                   "ON CONFLICT(keyword) DO UPDATE SET k = excluded.k, counts_json = excluded.counts_json, "
                   "fetched_at = excluded.fetched_at, provenance = excluded.provenance")
        .bind(1, topic.keyword)
        .bind(2, topic.k)
        .bind(3, json(topic.sample_citation_counts).dump())
        .bind(4, format_timestamp(topic.fetched_at))
        .bind(5, topic.provenance)
        .run();
}

std::optional<TopicContext> Snapshot::topic_sample(const std::string &keyword) {
    std::lock_guard lock(mutex_);
    Statement q(db_, "SELECT keyword, k, counts_json, fetched_at, provenance FROM topic_samples WHERE keyword = ?");
    q.bind(1, keyword);
    if (!q.step())
        return std::nullopt;
    TopicContext t;
    t.keyword = q.text(0);
    t.k = q.integer(1);
    t.sample_citation_counts = json::parse(q.text(2)).get<std::vector<std::int64_t>>();
    t.fetched_at = timestamp_column(q.text(3));
    t.provenance = q.text(4);
    return t;
}

void Snapshot::put_citations(const CitationHistory &history) {
    std::lock_guard lock(mutex_);
    require_writable();
    if (!paper_exists_locked(history.paper_id))
        throw Error(ErrorKind::UnknownPaper, history.paper_id + " is not in the snapshot");
    exec("SAVEPOINT citations");
    try {
        Statement(db_, "DELETE FROM citation_fetches WHERE paper_id = ?").bind(1, history.paper_id).run();
        Statement(db_, "INSERT INTO citation_fetches(paper_id, fetched_at) VALUES (?, ?)")
            .bind(1, history.paper_id)
            .bind(2, format_timestamp(history.fetched_at))
            .run();
        for (std::size_t i = 0; i < history.citing.size(); ++i)
            Statement(db_, "INSERT INTO citations(paper_id, ord, citing_id, citing_date) VALUES (?, ?, ?, ?)")
                .bind(1, history.paper_id)
                .bind(2, static_cast<std::int64_t>(i))
                .bind(3, history.citing[i].paper_id)
                .bind(4, optional_date_text(history.citing[i].publication_date))
                .run();
    } catch (...) {
        exec("ROLLBACK TO citations");
        exec("RELEASE citations");
        throw;
    }
    exec("RELEASE citations");
}

std::optional<CitationHistory> Snapshot::citations(const std::string &paper_id) {
    std::lock_guard lock(mutex_);
    Statement head(db_, "SELECT fetched_at FROM citation_fetches WHERE paper_id = ?");
    head.bind(1, paper_id);
    if (!head.step())
        return std::nullopt;
    CitationHistory h;
    h.paper_id = paper_id;
    h.fetched_at = timestamp_column(head.text(0));
    Statement q(db_, "SELECT citing_id, citing_date FROM citations WHERE paper_id = ? ORDER BY ord");
    q.bind(1, paper_id);
    while (q.step()) {
        CitingPaper c{q.text(0), std::nullopt};
        if (!q.is_null(1))
            c.publication_date = date_column(q.text(1));
        h.citing.push_back(std::move(c));
    }
    return h;
}

void Snapshot::put_relevance_count(const RelevanceCount &count) {
    std::lock_guard lock(mutex_);
    require_writable();
    if (count.from > count.to)
        throw Error(ErrorKind::InvalidDateRange, format_date(count.from) + " is after " + format_date(count.to));
    if (count.count < 0)
        throw Error(ErrorKind::InvalidArgument, "relevance count must be non-negative");
    Statement(db_, "INSERT INTO relevance_counts(keyword, from_date, to_date, count, fetched_at) VALUES (?, ?, ?, ?, ?) "
                   "ON CONFLICT(keyword, from_date, to_date) DO UPDATE SET count = excluded.count, "
                   "fetched_at = excluded.fetched_at")
        .bind(1, count.keyword)
        .bind(2, format_date(count.from))
        .bind(3, format_date(count.to))
        .bind(4, count.count)
        .bind(5, format_timestamp(count.fetched_at))
        .run();
}

std::optional<RelevanceCount> Snapshot::relevance_count(const std::string &keyword, const Date &from, const Date &to) {
    std::lock_guard lock(mutex_);
    Statement q(db_, "SELECT count, fetched_at FROM relevance_counts WHERE keyword = ? AND from_date = ? AND to_date = ?");
    q.bind(1, keyword).bind(2, format_date(from)).bind(3, format_date(to));
    if (!q.step())
        return std::nullopt;
    return RelevanceCount{keyword, from, to, q.integer(0), timestamp_column(q.text(1))};
}

void Snapshot::store_report(const std::string &paper_id, const core::IndicatorReport &report) {
    std::lock_guard lock(mutex_);
    require_writable();
    if (!paper_exists_locked(paper_id))
        throw Error(ErrorKind::UnknownPaper, paper_id + " is not in the snapshot");
    Statement(db_, "INSERT INTO reports(paper_id, computed_at, json) VALUES (?, ?, ?)")
        .bind(1, paper_id)
        .bind(2, format_timestamp(report.computed_at))
        .bind(3, core::to_json(report).dump())
        .run();
}

std::optional<core::IndicatorReport> Snapshot::latest_report(const std::string &paper_id) {
    std::lock_guard lock(mutex_);
    Statement q(db_, "SELECT json FROM reports WHERE paper_id = ? ORDER BY computed_at DESC, seq DESC LIMIT 1");
    q.bind(1, paper_id);
    if (!q.step())
        return std::nullopt;
    return core::report_from_json(json::parse(q.text(0)));
}

std::vector<core::IndicatorReport> Snapshot::report_history(const std::string &paper_id) {
    std::lock_guard lock(mutex_);
    std::vector<core::IndicatorReport> out;
    Statement q(db_, "SELECT json FROM reports WHERE paper_id = ? ORDER BY computed_at, seq");
    q.bind(1, paper_id);
    while (q.step())
        out.push_back(core::report_from_json(json::parse(q.text(0))));
    return out;
}

void Snapshot::store_features(const std::string &paper_id, const FeatureVector &fv, Timestamp stored_at) {
    std::lock_guard lock(mutex_);
    require_writable();
    validate(fv);
    if (!paper_exists_locked(paper_id))
        throw Error(ErrorKind::UnknownPaper, paper_id + " is not in the snapshot");
    Statement(db_, "INSERT INTO features(paper_id, stored_at, taxonomy, prisma, preliminary, benchmark, application, "
                   "discussion, structured_abstract) VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?)")
        .bind(1, paper_id)
        .bind(2, format_timestamp(stored_at))
        .bind(3, fv.taxonomy)
        .bind(4, fv.prisma)
        .bind(5, fv.preliminary)
        .bind(6, fv.benchmark)
        .bind(7, fv.application)
        .bind(8, fv.discussion)
        .bind(9, fv.structured_abstract)
        .run();
}

std::optional<StoredFeatures> Snapshot::latest_features(const std::string &paper_id) {
    std::lock_guard lock(mutex_);
    Statement q(db_, "SELECT stored_at, taxonomy, prisma, preliminary, benchmark, application, discussion, "
                     "structured_abstract FROM features WHERE paper_id = ? ORDER BY stored_at DESC, seq DESC LIMIT 1");
    q.bind(1, paper_id);
    if (!q.step())
        return std::nullopt;
    StoredFeatures out;
    out.stored_at = timestamp_column(q.text(0));
    const auto fields = feature_fields(out.features);
    for (std::size_t i = 0; i < fields.size(); ++i)
        *fields[i] = static_cast<int>(q.integer(static_cast<int>(i) + 1));
    return out;
}

std::optional<std::string> Snapshot::cache_get(const std::string &key) {
    std::lock_guard lock(mutex_);
    Statement q(db_, "SELECT body FROM http_cache WHERE key = ?");
    q.bind(1, key);
    if (!q.step())
        return std::nullopt;
    return q.text(0);
}

void Snapshot::cache_put(const std::string &key, const std::string &body) {
    std::lock_guard lock(mutex_);
    require_writable();
    Statement(db_, "INSERT INTO http_cache(key, body) VALUES (?, ?) ON CONFLICT(key) DO UPDATE SET body = excluded.body")
        .bind(1, key)
        .bind(2, body)
        .run();
}

void SnapshotResponseCache::put(const std::string &key, const std::string &body) {
    if (!snapshot_->read_only())
        snapshot_->cache_put(key, body);
}

std::size_t Snapshot::export_jsonl(std::ostream &out, const std::set<std::string> &kinds) {
    std::lock_guard lock(mutex_);
    const auto wanted = [&](const std::string &kind) { return kinds.empty() || kinds.count(kind) > 0; };
    std::size_t lines = 0;
    const auto emit = [&](const std::string &kind, json data) {
        out << line(kind, std::move(data)).dump() << '\n';
        ++lines;
    };

    if (wanted("paper")) {
        std::vector<std::string> ids;
        Statement q(db_, "SELECT canonical_id FROM papers ORDER BY canonical_id");
        while (q.step())
            ids.push_back(q.text(0));
        for (const auto &id : ids)
            emit("paper", retrieval::to_json(*paper_locked(id)));
    }
    if (wanted("review")) {
        Statement q(db_, "SELECT paper_id, harvest_keyword, added_at FROM reviews ORDER BY paper_id");
        while (q.step())
            emit("review", {{"paper_id", q.text(0)}, {"harvest_keyword", q.text(1)}, {"added_at", q.text(2)}});
    }
    if (wanted("topic")) {
        Statement q(db_, "SELECT paper_id, keyword, source FROM topics ORDER BY paper_id");
        while (q.step())
            emit("topic", {{"paper_id", q.text(0)}, {"keyword", q.text(1)}, {"source", q.text(2)}});
    }
    if (wanted("topic_sample")) {
        Statement q(db_, "SELECT keyword, k, counts_json, fetched_at, provenance FROM topic_samples ORDER BY keyword");
        while (q.step())
            emit("topic_sample", {{"keyword", q.text(0)},
                                  {"k", q.integer(1)},
                                  {"sample_citation_counts", json::parse(q.text(2))},
                                  {"fetched_at", q.text(3)},
                                  {"provenance", q.text(4)}});
    }
    if (wanted("citations")) {
        std::vector<std::pair<std::string, std::string>> heads;
        Statement q(db_, "SELECT paper_id, fetched_at FROM citation_fetches ORDER BY paper_id");
        while (q.step())
            heads.emplace_back(q.text(0), q.text(1));
        for (const auto &[paper_id, fetched_at] : heads) {
            json citing = json::array();
            Statement c(db_, "SELECT citing_id, citing_date FROM citations WHERE paper_id = ? ORDER BY ord");
            c.bind(1, paper_id);
            while (c.step())
                citing.push_back({{"paper_id", c.text(0)},
                                  {"publication_date", c.is_null(1) ? json(nullptr) : json(c.text(1))}});
            emit("citations", {{"paper_id", paper_id}, {"fetched_at", fetched_at}, {"citing", std::move(citing)}});
        }
    }
    if (wanted("relevance_count")) {
        Statement q(db_, "SELECT keyword, from_date, to_date, count, fetched_at FROM relevance_counts "
                         "ORDER BY keyword, from_date, to_date");
        while (q.step())
            emit("relevance_count", {{"keyword", q.text(0)},
                                     {"from", q.text(1)},
                                     {"to", q.text(2)},
                                     {"count", q.integer(3)},
                                     {"fetched_at", q.text(4)}});
    }
    if (wanted("report")) {
        Statement q(db_, "SELECT paper_id, json FROM reports ORDER BY paper_id, computed_at, seq");
        while (q.step())
            emit("report", {{"paper_id", q.text(0)}, {"report", json::parse(q.text(1))}});
    }
    if (wanted("features")) {
        Statement q(db_, "SELECT paper_id, stored_at, taxonomy, prisma, preliminary, benchmark, application, "
                         "discussion, structured_abstract FROM features ORDER BY paper_id, stored_at, seq");
        while (q.step()) {
            FeatureVector fv;
            const auto fields = feature_fields(fv);
            for (std::size_t i = 0; i < fields.size(); ++i)
                *fields[i] = static_cast<int>(q.integer(static_cast<int>(i) + 2));
            emit("features", {{"paper_id", q.text(0)}, {"stored_at", q.text(1)}, {"features", to_json(fv)}});
        }
    }
    return lines;
}

void Snapshot::import_line_locked(const json &entry) {
    const std::string kind = entry.at("kind").get<std::string>();
    const json &d = entry.at("data");
    const auto require_paper_locked = [&](const std::string &id) {
        if (!paper_exists_locked(id))
            throw Error(ErrorKind::UnknownPaper, id + " is not in the snapshot");
    };
    if (kind == "paper") {
        upsert_paper_locked(retrieval::paper_from_json(d));
    } else if (kind == "review") {
        const std::string id = d.at("paper_id").get<std::string>();
        require_paper_locked(id);
        Statement(db_, "INSERT OR REPLACE INTO reviews(paper_id, harvest_keyword, added_at) VALUES (?, ?, ?)")
            .bind(1, id)
            .bind(2, d.at("harvest_keyword").get<std::string>())
            .bind(3, format_timestamp(json_timestamp(d, "added_at")))
            .run();
    } else if (kind == "topic") {
        const std::string id = d.at("paper_id").get<std::string>();
        require_paper_locked(id);
        Statement(db_, "INSERT OR REPLACE INTO topics(paper_id, keyword, source) VALUES (?, ?, ?)")
            .bind(1, id)
            .bind(2, d.at("keyword").get<std::string>())
            .bind(3, d.at("source").get<std::string>())
            .run();
    } else if (kind == "topic_sample") {
        TopicContext t;
        t.keyword = d.at("keyword").get<std::string>();
        t.k = d.at("k").get<std::int64_t>();
        t.sample_citation_counts = d.at("sample_citation_counts").get<std::vector<std::int64_t>>();
        t.fetched_at = json_timestamp(d, "fetched_at");
        t.provenance = d.at("provenance").get<std::string>();
        put_topic_sample(t);
    } else if (kind == "citations") {
        CitationHistory h;
        h.paper_id = d.at("paper_id").get<std::string>();
        h.fetched_at = json_timestamp(d, "fetched_at");
        for (const auto &c : d.at("citing")) {
            CitingPaper p{c.at("paper_id").get<std::string>(), std::nullopt};
            if (!c.at("publication_date").is_null())
                p.publication_date = json_date(c, "publication_date");
            h.citing.push_back(std::move(p));
        }
        put_citations(h);
    } else if (kind == "relevance_count") {
        put_relevance_count({d.at("keyword").get<std::string>(), json_date(d, "from"), json_date(d, "to"),
                             d.at("count").get<std::int64_t>(), json_timestamp(d, "fetched_at")});
    } else if (kind == "report") {
        store_report(d.at("paper_id").get<std::string>(), core::report_from_json(d.at("report")));
    } else if (kind == "features") {
        store_features(d.at("paper_id").get<std::string>(), features_from_json(d.at("features")),
                       json_timestamp(d, "stored_at"));
    } else {
        throw Error(ErrorKind::ParseError, "unknown record kind '" + kind + "'");
    }
}

ImportResult Snapshot::import_jsonl(std::istream &in) {
    std::lock_guard lock(mutex_);
    require_writable();
    ImportResult result;
    exec("BEGIN");
    try {
        std::size_t number = 0;
        for (std::string text; std::getline(in, text);) {
            ++number;
            if (text.find_first_not_of(" \t\r") == std::string::npos)
                continue;
            exec("SAVEPOINT line");
            try {
                import_line_locked(json::parse(text));
                exec("RELEASE line");
                ++result.imported;
            } catch (const std::exception &e) {
                exec("ROLLBACK TO line");
                exec("RELEASE line");
                ++result.corrupt;
                result.problems.push_back("line " + std::to_string(number) + ": " + e.what());
            }
        }
        exec("COMMIT");
    } catch (...) {
        exec("ROLLBACK");
        throw;
    }
    return result;
}

} // namespace revmetrics::snapshot
