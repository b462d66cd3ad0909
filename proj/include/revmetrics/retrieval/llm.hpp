#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "revmetrics/retrieval/fetcher.hpp"

namespace revmetrics::retrieval {

struct ChatMessage {
    std::string role; // "system", "user", "assistant"
    std::string content;
};

/// A chat-completion request. `task` and `inputs` never go over the wire; they
/// let the deterministic stub answer without parsing prompt text.
struct ChatRequest {
    std::string task;
    std::vector<ChatMessage> messages;
    std::map<std::string, std::string> inputs;
};

class LlmClient {
public:
    virtual ~LlmClient() = default;
    /// Raw assistant text. Throws LlmUnavailable or MalformedResponse.
    virtual std::string complete(const ChatRequest &request) = 0;
};

/// OpenAI-style POST {base_url}/chat/completions.
class HttpLlmClient : public LlmClient {
public:
    HttpLlmClient(std::shared_ptr<Fetcher> fetcher, std::string base_url, std::string api_key,
                  std::string model = "gpt-3.5-turbo-0125");
    std::string complete(const ChatRequest &request) override;

    std::string request_body(const ChatRequest &request) const;

private:
    std::shared_ptr<Fetcher> fetcher_;
    std::string base_url_;
    std::string api_key_;
    std::string model_;
};

/// 16-hex-digit FNV-1a hash over the task and every message.
std::string fingerprint(const ChatRequest &request);

/// Deterministic offline stand-in for an LLM, driven by a JSON response table:
///   {"canned": [{"fingerprint": "...", "response": "..."},
///               {"task": "...", "contains": "...", "response": "..."}],
///    "topic_keywords": [{"contains": "...", "keyword": "..."}], ...}
/// Canned entries win; otherwise a per-task handler answers; otherwise
/// LlmUnavailable.
class StubLlmClient : public LlmClient {
public:
    using Handler = std::function<std::string(const ChatRequest &, const nlohmann::json &table)>;

    explicit StubLlmClient(nlohmann::json table = nlohmann::json::object());
    static std::shared_ptr<StubLlmClient> from_file(const std::string &path);

    void set_handler(const std::string &task, Handler handler);
    void add_canned(const std::string &fingerprint, std::string response);
    std::string complete(const ChatRequest &request) override;

    std::size_t calls() const { return calls_; }
    const nlohmann::json &table() const { return table_; }

private:
    nlohmann::json table_;
    std::map<std::string, std::string> by_fingerprint_;
    std::map<std::string, Handler> handlers_;
    std::size_t calls_ = 0;
};

struct LlmPromptProfile {
    std::string system_text;
    std::vector<std::pair<std::string, std::string>> few_shot_pairs;
    /// Must contain the {title} and {abstract} placeholders.
    std::string user_template;

    std::string render_user(const std::string &title, const std::string &abstract) const;
};

/// Profile with the best-scoring keyword instruction and one few-shot pair.
LlmPromptProfile default_topic_profile();

ChatRequest topic_keyword_request(const std::string &title, const std::string &abstract,
                                  const LlmPromptProfile &profile);

/// Reduces a reply to the bare keyword: trims, drops wrapping quotes or
/// backticks, a "Keyword:" label and a trailing period. Throws
/// MalformedResponse for empty, multi-line or sentence-length replies.
std::string parse_keyword_response(const std::string &reply);

std::string llm_topic_keyword(const std::string &title, const std::string &abstract, const LlmPromptProfile &profile,
                              LlmClient &llm);

/// Extracts a JSON object from a reply, tolerating a ```json fence.
/// Throws MalformedResponse.
nlohmann::json parse_json_reply(const std::string &reply);

} // namespace revmetrics::retrieval
