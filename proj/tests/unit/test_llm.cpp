#include <doctest.h>

#include <string>

#include <json.hpp>

#include "revmetrics/core/similarity.hpp"
#include "revmetrics/error.hpp"
#include "revmetrics/retrieval/llm.hpp"
#include "support/fakes.hpp"

using namespace revmetrics;
using namespace revmetrics::retrieval;
using nlohmann::json;

namespace {

ErrorKind kind_of(const std::function<void()> &fn) {
    try {
        fn();
    } catch (const Error &e) {
        return e.kind();
    }
    FAIL("expected an Error");
    return ErrorKind::InvalidArgument;
}

std::shared_ptr<StubLlmClient> fixture_stub() {
    return StubLlmClient::from_file(fakes::fixture("llm/stub_table.json"));
}

} // namespace

TEST_CASE("stub answers the topic prompt from its table") {
    auto stub = fixture_stub();
    const auto profile = default_topic_profile();
    CHECK(llm_topic_keyword("Few-Shot Object Detection: A Comprehensive Survey",
                            "Humans can recognize novel objects from a handful of examples.", profile,
                            *stub) == "few-shot object detection");
    CHECK(stub->calls() == 1);
    CHECK(llm_topic_keyword("Deep Learning for Everything", "", profile, *stub) == "multitask learning");
}

TEST_CASE("stub falls back to title words without survey boilerplate") {
    StubLlmClient stub;
    CHECK(llm_topic_keyword("A Survey on Federated Learning", "", default_topic_profile(), stub) ==
          "federated learning");
}

TEST_CASE("empty title and abstract surface the stub refusal as MalformedResponse") {
    auto stub = fixture_stub();
    CHECK(kind_of([&] { llm_topic_keyword("", "  ", default_topic_profile(), *stub); }) ==
          ErrorKind::MalformedResponse);
}

TEST_CASE("stub is deterministic and fingerprint-addressable") {
    StubLlmClient stub;
    const auto request = topic_keyword_request("Some Title", "Some abstract", default_topic_profile());
    const std::string fp = fingerprint(request);
    CHECK(fp.size() == 16);
    CHECK(fp == fingerprint(topic_keyword_request("Some Title", "Some abstract", default_topic_profile())));
    CHECK(fp != fingerprint(topic_keyword_request("Some Title", "Other abstract", default_topic_profile())));
    stub.add_canned(fp, "canned answer");
    CHECK(stub.complete(request) == "canned answer");

    ChatRequest unknown;
    unknown.task = "no_such_task";
    CHECK(kind_of([&] { stub.complete(unknown); }) == ErrorKind::LlmUnavailable);
}

TEST_CASE("topic prompt carries the instruction, the few-shot pair and the paper") {
    const auto profile = default_topic_profile();
    REQUIRE(profile.few_shot_pairs.size() == 1);
    CHECK(profile.few_shot_pairs[0].second == "vision transformer");
    const auto request = topic_keyword_request("T1", "A1", profile);
    REQUIRE(request.messages.size() == 4);
    CHECK(request.messages[0].role == "system");
    CHECK(request.messages[1].role == "user");
    CHECK(request.messages[2].role == "assistant");
    CHECK(request.messages[3].content.find("Title: T1\nAbstract: A1") != std::string::npos);
    CHECK(request.messages[3].content.find("Avoid using broad or overly general term") != std::string::npos);

    LlmPromptProfile broken;
    broken.user_template = "Title only: {title}";
    CHECK(kind_of([&] { topic_keyword_request("t", "a", broken); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("parse_keyword_response normalizes and rejects") {
    CHECK(parse_keyword_response("  vision transformer \n") == "vision transformer");
    CHECK(parse_keyword_response("Keyword: `object detection`.") == "object detection");
    CHECK(parse_keyword_response("\"knowledge distillation\"") == "knowledge distillation");
    CHECK(kind_of([] { parse_keyword_response(""); }) == ErrorKind::MalformedResponse);
    CHECK(kind_of([] { parse_keyword_response("gan\nvae"); }) == ErrorKind::MalformedResponse);
    CHECK(kind_of([] {
              parse_keyword_response("I am unable to determine the topic because the input text is empty here");
          }) == ErrorKind::MalformedResponse);
}

TEST_CASE("HTTP client speaks the chat-completion contract") {
    auto fixtures = std::make_shared<FixtureTransport>();
    auto fetcher = fakes::fast_fetcher(fixtures);
    HttpLlmClient client(fetcher, "https://llm.example.org/v1/", "key");
    const auto request = topic_keyword_request("T", "A", default_topic_profile());
    const json body = json::parse(client.request_body(request));
    CHECK(body.at("model") == "gpt-3.5-turbo-0125");
    CHECK(body.at("temperature") == 0);
    CHECK(body.at("messages").size() == 4);

    fixtures->add({"POST", "https://llm.example.org/v1/chat/completions", {}, client.request_body(request)},
                  {200, json{{"choices", {{{"message", {{"role", "assistant"}, {"content", "point cloud"}}}}}}}.dump()});
    CHECK(llm_topic_keyword("T", "A", default_topic_profile(), client) == "point cloud");

    CHECK(kind_of([&] { llm_topic_keyword("U", "B", default_topic_profile(), client); }) == ErrorKind::LlmUnavailable);

    HttpLlmClient unconfigured(fetcher, "", "");
    CHECK(kind_of([&] { unconfigured.complete(request); }) == ErrorKind::LlmUnavailable);

    const auto garbled_request = topic_keyword_request("G", "G", default_topic_profile());
    fixtures->add({"POST", "https://llm.example.org/v1/chat/completions", {}, client.request_body(garbled_request)},
                  {200, "{\"choices\": []}"});
    CHECK(kind_of([&] { client.complete(garbled_request); }) == ErrorKind::MalformedResponse);
}

TEST_CASE("parse_json_reply tolerates code fences") {
    CHECK(parse_json_reply("{\"figures\": [\"a\"]}").at("figures").size() == 1);
    CHECK(parse_json_reply("```json\n{\"tables\": []}\n```").at("tables").empty());
    CHECK(kind_of([] { parse_json_reply("not json"); }) == ErrorKind::MalformedResponse);
    CHECK(kind_of([] { parse_json_reply("[1, 2]"); }) == ErrorKind::MalformedResponse);
}

TEST_CASE("stub keywords stay close to the reference keyword under NED") {
    auto stub = fixture_stub();
    const auto kw = llm_topic_keyword("Few-shot object detection survey", "", default_topic_profile(), *stub);
    CHECK(core::normalized_edit_distance(kw, "few-shot object detection") == 0.0);
}
