#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <sqlite3.h>
#include <unistd.h>

#include "revmetrics/error.hpp"
#include "revmetrics/snapshot/snapshot.hpp"
#include "support/fakes.hpp"

using namespace revmetrics;
using namespace revmetrics::snapshot;
using retrieval::PaperRecord;

namespace {

const Timestamp kCreated = *parse_timestamp("2024-10-01T00:00:00Z");

class TempDir {
public:
    TempDir() {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("revmetrics_snapshot_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    std::filesystem::path file(const std::string &name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

ErrorKind kind_of(const std::function<void()> &fn) {
    try {
        fn();
    } catch (const Error &e) {
        return e.kind();
    }
    FAIL("expected an Error");
    return ErrorKind::InvalidArgument;
}

PaperRecord make_paper(int i) {
    PaperRecord r;
    r.canonical_id = "arxiv:2101." + std::to_string(10000 + i);
    r.external_ids = {{"arxiv", r.canonical_id.substr(6)}, {"s2", "S2_" + std::to_string(i)}};
    r.title = "Paper " + std::to_string(i) + " on \"things\"";
    r.abstract = i % 3 == 0 ? "" : "Abstract\nwith é and line breaks " + std::to_string(i);
    if (i % 7 != 0)
        r.publication_date = add_days(*parse_date("2015-01-01"), i * 3);
    if (i % 5 != 0)
        r.venue = "Venue " + std::to_string(i % 4);
    if (i % 4 != 0)
        r.citation_count = i * 11 % 97;
    for (int k = 0; k < i % 4; ++k)
        r.reference_ids.push_back("arxiv:2101." + std::to_string(10000 + (i * 13 + k) % 1000));
    r.author_count = i % 9;
    r.retrieved_at = kCreated;
    r.id_join = i % 2 ? "arxiv" : "";
    return r;
}

core::IndicatorReport make_report(const std::string &when, double tncsi) {
    core::IndicatorReport r;
    r.tncsi = tncsi;
    r.topic_keyword = "object detection";
    r.sample_size = 5;
    r.beta = 5;
    r.computed_at = *parse_timestamp(when);
    return r;
}

std::string export_all(Snapshot &snap) {
    std::ostringstream out;
    snap.export_jsonl(out);
    return out.str();
}

void populate(Snapshot &snap) {
    for (int i = 0; i < 6; ++i)
        snap.upsert_paper(make_paper(i));
    const auto review = make_paper(1).canonical_id;
    snap.add_review({review, "object detection", kCreated});
    snap.set_topic({review, "object detection", "stub"});
    snap.put_topic_sample({"object detection", {0, 3, 9, 1, 0}, 1000, kCreated, "fixture"});
    snap.put_citations({review, kCreated, {{"c1", parse_date("2024-07-02")}, {"c2", std::nullopt}}});
    snap.put_relevance_count({"object detection", *parse_date("2019-01-01"), *parse_date("2021-01-01"), 250, kCreated});
    snap.store_report(review, make_report("2024-10-01T00:00:00Z", 0.5));
    snap.store_report(review, make_report("2024-09-01T00:00:00Z", 0.25));
    snap.store_features(review, FeatureVector{1, 0, 1, 0, 1, 1, 0}, kCreated);
}

} // namespace

TEST_CASE("a new snapshot records its metadata") {
    TempDir dir;
    auto snap = Snapshot::open(dir.file("s.db"), OpenMode::ReadWrite, kCreated, "unit test");
    const auto meta = snap->meta();
    CHECK(meta.schema_version == kSchemaVersion);
    CHECK(meta.created_at == kCreated);
    CHECK(meta.source_notes == "unit test");
    CHECK(snap->paper_count() == 0);
}

TEST_CASE("upsert replaces by canonical id") {
    TempDir dir;
    auto snap = Snapshot::open(dir.file("s.db"), OpenMode::ReadWrite, kCreated);
    auto p = make_paper(1);
    p.citation_count = 10;
    CHECK(snap->upsert_paper(p) == p.canonical_id);
    p.citation_count = 42;
    p.reference_ids = {"doi:10.1/a"};
    snap->upsert_paper(p);
    CHECK(snap->paper_count() == 1);
    CHECK(snap->require_paper(p.canonical_id) == p);
    CHECK_FALSE(snap->paper("arxiv:none").has_value());
    CHECK(kind_of([&] { snap->require_paper("arxiv:none"); }) == ErrorKind::UnknownPaper);
}

TEST_CASE("records failing validation are rejected") {
    TempDir dir;
    auto snap = Snapshot::open(dir.file("s.db"), OpenMode::ReadWrite, kCreated);
    auto p = make_paper(2);
    p.canonical_id.clear();
    CHECK(kind_of([&] { snap->upsert_paper(p); }) == ErrorKind::InvalidArgument);
    CHECK(snap->paper_count() == 0);
}

TEST_CASE("1000 upserts give the same content in any order") {
    std::vector<PaperRecord> papers;
    for (int i = 0; i < 1000; ++i)
        papers.push_back(make_paper(i));
    TempDir dir;
    auto a = Snapshot::open(dir.file("a.db"), OpenMode::ReadWrite, kCreated);
    auto b = Snapshot::open(dir.file("b.db"), OpenMode::ReadWrite, kCreated);
    for (const auto &p : papers)
        a->upsert_paper(p);
    std::mt19937 rng(77);
    std::shuffle(papers.begin(), papers.end(), rng);
    for (const auto &p : papers)
        b->upsert_paper(p);
    CHECK(a->paper_count() == 1000);
    CHECK(export_all(*a) == export_all(*b));
    for (int i : {0, 7, 499, 999})
        CHECK(a->require_paper(make_paper(i).canonical_id) == make_paper(i));
}

TEST_CASE("dangling references are allowed and reported") {
    TempDir dir;
    auto snap = Snapshot::open(dir.file("s.db"), OpenMode::ReadWrite, kCreated);
    auto p = make_paper(3);
    p.reference_ids = {make_paper(4).canonical_id, "doi:10.9/missing"};
    snap->upsert_paper(p);
    snap->upsert_paper(make_paper(4));
    const auto dangling = snap->dangling_references();
    REQUIRE(dangling.size() == 1);
    CHECK(dangling[0] == std::make_pair(p.canonical_id, std::string("doi:10.9/missing")));
}

TEST_CASE("export then import round-trips byte-identically") {
    TempDir dir;
    auto src = Snapshot::open(dir.file("src.db"), OpenMode::ReadWrite, kCreated);
    populate(*src);
    const std::string first = export_all(*src);
    CHECK(std::count(first.begin(), first.end(), '\n') == 6 + 1 + 1 + 1 + 1 + 1 + 2 + 1);

    auto dst = Snapshot::open(dir.file("dst.db"), OpenMode::ReadWrite, kCreated);
    std::istringstream in(first);
    const auto result = dst->import_jsonl(in);
    CHECK(result.imported == 14);
    CHECK(result.corrupt == 0);
    CHECK(dst->paper_count() == src->paper_count());
    CHECK(export_all(*dst) == first);

    std::ostringstream only_papers;
    CHECK(src->export_jsonl(only_papers, {"paper"}) == 6);
}

TEST_CASE("exported lines are canonical JSON") {
    TempDir dir;
    auto snap = Snapshot::open(dir.file("s.db"), OpenMode::ReadWrite, kCreated);
    populate(*snap);
    std::istringstream in(export_all(*snap));
    for (std::string line; std::getline(in, line);) {
        const auto parsed = nlohmann::json::parse(line);
        CHECK(parsed.dump() == line);
        CHECK(parsed.size() == 2);
    }
    CHECK(export_all(*snap).find("\"publication_date\":\"2015-01-04\"") != std::string::npos);
}

TEST_CASE("empty snapshot exports nothing") {
    TempDir dir;
    auto snap = Snapshot::open(dir.file("s.db"), OpenMode::ReadWrite, kCreated);
    std::ostringstream out;
    CHECK(snap->export_jsonl(out) == 0);
    CHECK(out.str().empty());
}

TEST_CASE("a corrupt line is skipped and tallied") {
    std::ostringstream lines;
    for (int i = 0; i < 10; ++i) {
        if (i == 6)
            lines << "{\"kind\":\"paper\",\"data\":{\"canonical_id\":\n";
        else
            lines << nlohmann::json{{"kind", "paper"}, {"data", retrieval::to_json(make_paper(i))}}.dump() << '\n';
    }
    TempDir dir;
    auto snap = Snapshot::open(dir.file("s.db"), OpenMode::ReadWrite, kCreated);
    std::istringstream in(lines.str());
    const auto result = snap->import_jsonl(in);
    CHECK(result.imported == 9);
    CHECK(result.corrupt == 1);
    REQUIRE(result.problems.size() == 1);
    CHECK(result.problems[0].rfind("line 7:", 0) == 0);
    CHECK(snap->paper_count() == 9);
}

TEST_CASE("semantically invalid lines are tallied without partial writes") {
    TempDir dir;
    auto snap = Snapshot::open(dir.file("s.db"), OpenMode::ReadWrite, kCreated);
    std::istringstream in(
        R"({"kind":"report","data":{"paper_id":"arxiv:missing","report":{}}})" "\n"
        R"({"kind":"mystery","data":{}})" "\n"
        R"({"kind":"features","data":{"paper_id":"x","stored_at":"2024-01-01T00:00:00Z","features":{"taxonomy":2}}})" "\n"
        "\n");
    const auto result = snap->import_jsonl(in);
    CHECK(result.imported == 0);
    CHECK(result.corrupt == 3);
    CHECK(export_all(*snap).empty());
}

TEST_CASE("reports are versioned; latest wins and history is kept") {
    TempDir dir;
    auto snap = Snapshot::open(dir.file("s.db"), OpenMode::ReadWrite, kCreated);
    populate(*snap);
    const auto id = make_paper(1).canonical_id;
    CHECK(snap->latest_report(id)->tncsi == std::optional<double>(0.5));
    const auto history = snap->report_history(id);
    REQUIRE(history.size() == 2);
    CHECK(history[0].computed_at < history[1].computed_at);
    CHECK(history[0].tncsi == std::optional<double>(0.25));
    CHECK_FALSE(snap->latest_report(make_paper(2).canonical_id).has_value());
    CHECK(kind_of([&] { snap->store_report("arxiv:none", make_report("2024-01-01T00:00:00Z", 0.1)); }) ==
          ErrorKind::UnknownPaper);
}

TEST_CASE("features need a stored paper and binary values") {
    TempDir dir;
    auto snap = Snapshot::open(dir.file("s.db"), OpenMode::ReadWrite, kCreated);
    populate(*snap);
    const auto id = make_paper(1).canonical_id;
    CHECK(snap->latest_features(id)->features == FeatureVector{1, 0, 1, 0, 1, 1, 0});
    CHECK(kind_of([&] { snap->store_features("arxiv:none", FeatureVector{}, kCreated); }) == ErrorKind::UnknownPaper);
    FeatureVector bad;
    bad.benchmark = 2;
    CHECK(kind_of([&] { snap->store_features(id, bad, kCreated); }) == ErrorKind::InvalidArgument);
    CHECK(feature_value(FeatureVector{0, 0, 0, 0, 0, 0, 1}, "structured_abstract") == 1);
    CHECK(kind_of([] { feature_value(FeatureVector{}, "novelty"); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("topic, sample, citation and relevance data read back") {
    TempDir dir;
    auto snap = Snapshot::open(dir.file("s.db"), OpenMode::ReadWrite, kCreated);
    populate(*snap);
    const auto id = make_paper(1).canonical_id;
    CHECK(snap->is_review(id));
    CHECK_FALSE(snap->is_review(make_paper(2).canonical_id));
    CHECK(snap->topic(id)->keyword == "object detection");
    CHECK(snap->topic_sample("object detection")->sample_citation_counts == std::vector<std::int64_t>{0, 3, 9, 1, 0});
    const auto cites = snap->citations(id);
    REQUIRE(cites.has_value());
    REQUIRE(cites->citing.size() == 2);
    CHECK_FALSE(cites->citing[1].publication_date.has_value());
    CHECK_FALSE(snap->citations(make_paper(2).canonical_id).has_value());
    CHECK(snap->relevance_count("object detection", *parse_date("2019-01-01"), *parse_date("2021-01-01"))->count == 250);
    CHECK_FALSE(snap->relevance_count("object detection", *parse_date("2019-01-01"), *parse_date("2021-01-02")));
    CHECK(kind_of([&] {
              snap->put_relevance_count({"x", *parse_date("2021-01-01"), *parse_date("2020-01-01"), 1, kCreated});
          }) == ErrorKind::InvalidDateRange);
    CHECK(kind_of([&] { snap->put_topic_sample({"x", {}, 1000, kCreated, ""}); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("read-only snapshots never change on disk") {
    TempDir dir;
    const auto path = dir.file("s.db");
    {
        auto snap = Snapshot::open(path, OpenMode::ReadWrite, kCreated);
        populate(*snap);
    }
    const std::string before = fakes::read_file(path.string());
    {
        auto snap = Snapshot::open(path, OpenMode::ReadOnly);
        CHECK(snap->read_only());
        export_all(*snap);
        for (const auto &id : snap->paper_ids())
            snap->latest_report(id);
        CHECK(kind_of([&] { snap->upsert_paper(make_paper(50)); }) == ErrorKind::StorageError);
        CHECK(kind_of([&] { snap->cache_put("k", "v"); }) == ErrorKind::StorageError);
        snapshot::SnapshotResponseCache cache(std::shared_ptr<Snapshot>(std::move(snap)));
        cache.put("k", "v");
    }
    CHECK(fakes::read_file(path.string()) == before);
    CHECK(kind_of([&] { Snapshot::open(dir.file("missing.db"), OpenMode::ReadOnly); }) == ErrorKind::StorageError);
}

TEST_CASE("schema version mismatch is refused") {
    TempDir dir;
    const auto path = dir.file("s.db");
    Snapshot::open(path, OpenMode::ReadWrite, kCreated);
    sqlite3 *db = nullptr;
    REQUIRE(sqlite3_open(path.string().c_str(), &db) == SQLITE_OK);
    sqlite3_exec(db, "UPDATE meta SET value = '99' WHERE key = 'schema_version'", nullptr, nullptr, nullptr);
    sqlite3_close(db);
    CHECK(kind_of([&] { Snapshot::open(path); }) == ErrorKind::SchemaMismatch);

    const auto other = dir.file("other.db");
    REQUIRE(sqlite3_open(other.string().c_str(), &db) == SQLITE_OK);
    sqlite3_exec(db, "CREATE TABLE t(x)", nullptr, nullptr, nullptr);
    sqlite3_close(db);
    CHECK(kind_of([&] { Snapshot::open(other); }) == ErrorKind::SchemaMismatch);
}

TEST_CASE("snapshot-backed response cache persists across sessions") {
    TempDir dir;
    const auto path = dir.file("s.db");
    auto fixtures = std::make_shared<retrieval::FixtureTransport>();
    fixtures->add({"GET", "https://h/x", {}, ""}, {200, "payload"});
    auto counting = std::make_shared<retrieval::CountingTransport>(fixtures);
    {
        std::shared_ptr<Snapshot> snap = Snapshot::open(path, OpenMode::ReadWrite, kCreated);
        auto fetcher = fakes::fast_fetcher(counting, std::make_shared<SnapshotResponseCache>(snap));
        CHECK(fetcher->fetch({"GET", "https://h/x", {}, ""}).body == "payload");
    }
    {
        std::shared_ptr<Snapshot> snap = Snapshot::open(path, OpenMode::ReadOnly);
        auto fetcher = fakes::fast_fetcher(counting, std::make_shared<SnapshotResponseCache>(snap));
        CHECK(fetcher->fetch({"GET", "https://h/x", {}, ""}).body == "payload");
    }
    CHECK(counting->count() == 1);
}

TEST_CASE("concurrent writers are serialized") {
    TempDir dir;
    auto snap = Snapshot::open(dir.file("s.db"), OpenMode::ReadWrite, kCreated);
    std::vector<std::thread> writers;
    for (int t = 0; t < 4; ++t)
        writers.emplace_back([&, t] {
            for (int i = t; i < 200; i += 4)
                snap->upsert_paper(make_paper(i));
        });
    for (auto &w : writers)
        w.join();
    CHECK(snap->paper_count() == 200);
}
