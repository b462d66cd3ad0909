#include <doctest.h>

#include <fstream>
#include <string>

#include "revmetrics/error.hpp"
#include "revmetrics/retrieval/arxiv.hpp"
#include "support/fakes.hpp"

using namespace revmetrics;
using namespace revmetrics::retrieval;

namespace {

const Timestamp kRetrieved = *parse_timestamp("2024-10-01T00:00:00Z");

}

TEST_CASE("arxiv_review_query is byte-exact for the keyword fixtures") {
    std::ifstream in(fakes::fixture("query_grammar.tsv"));
    REQUIRE(in);
    int rows = 0;
    for (std::string line; std::getline(in, line);) {
        const auto tab = line.find('\t');
        REQUIRE(tab != std::string::npos);
        CHECK(arxiv_review_query(line.substr(0, tab)) == line.substr(tab + 1));
        ++rows;
    }
    CHECK(rows == 10);
}

TEST_CASE("arxiv_review_query rejects empty keywords") {
    CHECK_THROWS_AS(arxiv_review_query(""), Error);
    try {
        arxiv_review_query("  \t");
        FAIL("expected EmptyKeyword");
    } catch (const Error &e) {
        CHECK(e.kind() == ErrorKind::EmptyKeyword);
    }
}

TEST_CASE("parse_arxiv_feed reads every entry") {
    const auto records = parse_arxiv_feed(fakes::read_file(fakes::fixture("arxiv/feed_three.xml")), kRetrieved);
    REQUIRE(records.size() == 3);
    CHECK(records[0].canonical_id == "arxiv:2301.00001");
    CHECK(records[0].external_ids.at("doi") == "10.1000/SOD.2023.1");
    CHECK(records[0].title == "A Survey of Small Object Detection");
    CHECK(records[0].author_count == 2);
    CHECK(records[0].venue == std::optional<std::string>("Pattern Recognition Letters 12 (2023)"));
    CHECK(records[0].publication_date == parse_date("2023-01-03"));
    CHECK(records[2].author_count == 3);
    for (const auto &r : records) {
        CHECK_FALSE(r.citation_count.has_value());
        CHECK_NOTHROW(validate(r));
    }
}

TEST_CASE("fetch_candidates keeps entries whose abstract mentions the keyword") {
    auto fixtures = std::make_shared<FixtureTransport>();
    ArxivClient probe(fakes::fast_fetcher(fixtures));
    fixtures->add({"GET", probe.page_url("Object Detection", 0, 3), {}, ""},
                  {200, fakes::read_file(fakes::fixture("arxiv/feed_three.xml"))});
    auto counting = std::make_shared<CountingTransport>(fixtures);
    ArxivClient client(fakes::fast_fetcher(counting));

    const auto hits = client.fetch_candidates("Object Detection", 3, kRetrieved);
    REQUIRE(hits.size() == 2);
    CHECK(hits[0].canonical_id == "arxiv:2301.00001");
    CHECK(hits[1].canonical_id == "arxiv:2302.00002");
    CHECK(counting->count() == 1);

    CHECK(client.fetch_candidates("Object Detection", 0, kRetrieved).empty());
    CHECK(counting->count() == 1);
}

TEST_CASE("fetch_candidates stops at a short page") {
    auto fixtures = std::make_shared<FixtureTransport>();
    ArxivClient client(fakes::fast_fetcher(fixtures));
    const std::string empty_feed = R"(<feed xmlns="http://www.w3.org/2005/Atom"></feed>)";
    fixtures->add({"GET", client.page_url("object detection", 0, 100), {}, ""}, {200, empty_feed});
    CHECK(client.fetch_candidates("object detection", 250, kRetrieved).empty());
    CHECK(client.page_url("x", 200, 50) ==
          "http://export.arxiv.org/api/query?search_query=%28ti%3A%22review%22%20OR%20ti%3A%22survey%22%29%20AND%20"
          "%28ti%3A%22x%22%20OR%20abs%3A%22x%22%29&start=200&max_results=50");
}

TEST_CASE("malformed feeds raise ParseError") {
    const auto expect_parse_error = [](const std::string &xml) {
        try {
            parse_arxiv_feed(xml, kRetrieved);
            FAIL("expected ParseError");
        } catch (const Error &e) {
            CHECK(e.kind() == ErrorKind::ParseError);
        }
    };
    expect_parse_error(fakes::read_file(fakes::fixture("arxiv/malformed.xml")));
    expect_parse_error("<html><body>Service unavailable</body></html>");
    expect_parse_error(R"(<feed xmlns="http://www.w3.org/2005/Atom"><entry><id>http://arxiv.org/api/errors#x</id>)"
                       R"(<summary>malformed query</summary></entry></feed>)");
}

TEST_CASE("abstract_mentions ignores case and line breaks") {
    CHECK(abstract_mentions("Small OBJECT\n  DETECTION methods", "object detection"));
    CHECK_FALSE(abstract_mentions("detection of objects", "object detection"));
    CHECK_FALSE(abstract_mentions("anything", ""));
}
