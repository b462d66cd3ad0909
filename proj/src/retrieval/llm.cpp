#include "revmetrics/retrieval/llm.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "revmetrics/error.hpp"

namespace revmetrics::retrieval {

namespace {

std::string lower(std::string text) {
    std::transform(text.begin(), text.end(), text.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return text;
}

std::string trim(const std::string &text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos)
        return {};
    const auto last = text.find_last_not_of(" \t\r\n");
    return text.substr(first, last - first + 1);
}

std::string replace_all(std::string text, const std::string &from, const std::string &to) {
    for (std::size_t pos = text.find(from); pos != std::string::npos; pos = text.find(from, pos + to.size()))
        text.replace(pos, from.size(), to);
    return text;
}

std::string last_user_message(const ChatRequest &request) {
    for (auto it = request.messages.rbegin(); it != request.messages.rend(); ++it)
        if (it->role == "user")
            return it->content;
    return {};
}

std::string input_or_empty(const ChatRequest &request, const std::string &key) {
    const auto it = request.inputs.find(key);
    return it == request.inputs.end() ? std::string{} : it->second;
}

// Title words minus survey boilerplate, at most four of them.
std::string keyword_from_title(const std::string &title) {
    static const std::set<std::string> boilerplate{
        "a",      "an",     "the",         "survey",     "surveys",   "review",  "reviews", "on",
        "of",     "for",    "and",         "in",         "to",        "with",    "its",     "their",
        "comprehensive",    "systematic",  "literature", "recent",    "advances", "overview", "towards",
        "toward", "state",  "art",         "perspective", "tutorial", "progress", "study",  "analysis"};
    std::vector<std::string> words;
    std::string current;
    const auto flush = [&] {
        if (!current.empty() && !boilerplate.count(current))
            words.push_back(current);
        current.clear();
    };
    for (const char ch : lower(title)) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c) || c == '-' || c >= 0x80)
            current.push_back(ch);
        else
            flush();
    }
    flush();
    if (words.size() > 4)
        words.resize(4);
    std::string out;
    for (const auto &w : words)
        out += (out.empty() ? "" : " ") + w;
    return out;
}

std::string topic_keyword_stub(const ChatRequest &request, const nlohmann::json &table) {
    const std::string title = input_or_empty(request, "title");
    const std::string abstract = input_or_empty(request, "abstract");
    if (trim(title).empty() && trim(abstract).empty())
        return "I'm sorry, but I cannot identify a topic because no title or abstract was provided to me.";
    const std::string haystack = lower(title + "\n" + abstract);
    if (const auto rules = table.find("topic_keywords"); rules != table.end() && rules->is_array())
        for (const auto &rule : *rules)
            if (haystack.find(lower(rule.value("contains", std::string{}))) != std::string::npos)
                return rule.value("keyword", std::string{});
    const std::string derived = keyword_from_title(title);
    return derived.empty() ? keyword_from_title(abstract) : derived;
}

} // namespace

HttpLlmClient::HttpLlmClient(std::shared_ptr<Fetcher> fetcher, std::string base_url, std::string api_key,
                             std::string model)
    : fetcher_(std::move(fetcher)), base_url_(std::move(base_url)), api_key_(std::move(api_key)),
      model_(std::move(model)) {
    while (!base_url_.empty() && base_url_.back() == '/')
        base_url_.pop_back();
}

std::string HttpLlmClient::request_body(const ChatRequest &request) const {
    nlohmann::json body;
    body["model"] = model_;
    body["temperature"] = 0;
    body["messages"] = nlohmann::json::array();
    for (const auto &m : request.messages)
        body["messages"].push_back({{"role", m.role}, {"content", m.content}});
    return body.dump();
}

std::string HttpLlmClient::complete(const ChatRequest &request) {
    if (base_url_.empty())
        throw Error(ErrorKind::LlmUnavailable, "no LLM endpoint configured (LLM_BASE_URL)");
    HttpRequest http{"POST", base_url_ + "/chat/completions", {{"Content-Type", "application/json"}},
                     request_body(request)};
    if (!api_key_.empty())
        http.headers.emplace_back("Authorization", "Bearer " + api_key_);
    HttpResponse response;
    try {
        response = fetcher_->fetch(http);
    } catch (const Error &e) {
        if (e.kind() == ErrorKind::NetworkError || e.kind() == ErrorKind::RateLimited)
            throw Error(ErrorKind::LlmUnavailable, e.what());
        throw;
    }
    if (response.status != 200)
        throw Error(ErrorKind::LlmUnavailable, "LLM endpoint returned HTTP " + std::to_string(response.status));
    try {
        const auto json = nlohmann::json::parse(response.body);
        return json.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception &e) {
        throw Error(ErrorKind::MalformedResponse, std::string("chat completion: ") + e.what());
    }
}

std::string fingerprint(const ChatRequest &request) {
    std::uint64_t hash = 14695981039346656037ull;
    const auto mix = [&hash](std::string_view text) {
        for (const char c : text) {
            hash ^= static_cast<unsigned char>(c);
            hash *= 1099511628211ull;
        }
        hash ^= 0xFF; // field separator
        hash *= 1099511628211ull;
    };
    mix(request.task);
    for (const auto &m : request.messages) {
        mix(m.role);
        mix(m.content);
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

StubLlmClient::StubLlmClient(nlohmann::json table) : table_(std::move(table)) {
    if (!table_.is_object())
        throw Error(ErrorKind::ParseError, "stub table must be a JSON object");
    if (const auto canned = table_.find("canned"); canned != table_.end() && canned->is_array())
        for (const auto &entry : *canned)
            if (entry.contains("fingerprint"))
                by_fingerprint_[entry.at("fingerprint").get<std::string>()] = entry.value("response", std::string{});
    handlers_["topic_keyword"] = topic_keyword_stub;
}

std::shared_ptr<StubLlmClient> StubLlmClient::from_file(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorKind::InvalidArgument, "cannot read stub table " + path);
    try {
        return std::make_shared<StubLlmClient>(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception &e) {
        throw Error(ErrorKind::ParseError, "stub table " + path + ": " + e.what());
    }
}

void StubLlmClient::set_handler(const std::string &task, Handler handler) { handlers_[task] = std::move(handler); }

void StubLlmClient::add_canned(const std::string &fp, std::string response) { by_fingerprint_[fp] = std::move(response); }

std::string StubLlmClient::complete(const ChatRequest &request) {
    ++calls_;
    if (const auto it = by_fingerprint_.find(fingerprint(request)); it != by_fingerprint_.end())
        return it->second;
    if (const auto canned = table_.find("canned"); canned != table_.end() && canned->is_array()) {
        const std::string prompt = lower(last_user_message(request));
        for (const auto &entry : *canned) {
            if (!entry.contains("contains") || entry.value("task", request.task) != request.task)
                continue;
            if (prompt.find(lower(entry.at("contains").get<std::string>())) != std::string::npos)
                return entry.value("response", std::string{});
        }
    }
    if (const auto it = handlers_.find(request.task); it != handlers_.end())
        return it->second(request, table_);
    throw Error(ErrorKind::LlmUnavailable, "stub has no response for task '" + request.task + "'");
}

std::string LlmPromptProfile::render_user(const std::string &title, const std::string &abstract) const {
    return replace_all(replace_all(user_template, "{title}", title), "{abstract}", abstract);
}

LlmPromptProfile default_topic_profile() {
    LlmPromptProfile profile;
    profile.system_text = "You are an assistant that names the research topic of scholarly papers. "
                          "Reply with the topic keyword only.";
    profile.user_template =
        "Identifying the topic of the paper based on the given title and abstract. I'm going to write a review of "
        "the same topic and I will directly use it as keyword to retrieve enough related reference papers in the "
        "same topic from scholar search engine.  Avoid using broad or overly general term like 'deep learning', "
        "'taxonomy', or 'surveys'. Instead, focus on keyword that are unique and directly pertinent to the paper's "
        "subject. Answer with the word only in the following format: xxx\n\nTitle: {title}\nAbstract: {abstract}";
    const std::string example_title = "An Image is Worth 16x16 Words: Transformers for Image Recognition at Scale";
    const std::string example_abstract =
        "We apply a standard Transformer directly to sequences of fixed-size image patches and show that, when "
        "pre-trained on large datasets and transferred to mid-sized or small image recognition benchmarks, the pure "
        "transformer matches or outperforms state-of-the-art convolutional networks while requiring substantially "
        "fewer computational resources to train.";
    profile.few_shot_pairs.emplace_back(profile.render_user(example_title, example_abstract), "vision transformer");
    return profile;
}

ChatRequest topic_keyword_request(const std::string &title, const std::string &abstract,
                                  const LlmPromptProfile &profile) {
    if (profile.user_template.find("{title}") == std::string::npos ||
        profile.user_template.find("{abstract}") == std::string::npos)
        throw Error(ErrorKind::InvalidArgument, "prompt template lacks {title} or {abstract}");
    ChatRequest request;
    request.task = "topic_keyword";
    if (!profile.system_text.empty())
        request.messages.push_back({"system", profile.system_text});
    for (const auto &[user, assistant] : profile.few_shot_pairs) {
        request.messages.push_back({"user", user});
        request.messages.push_back({"assistant", assistant});
    }
    request.messages.push_back({"user", profile.render_user(title, abstract)});
    request.inputs = {{"title", title}, {"abstract", abstract}};
    return request;
}

std::string parse_keyword_response(const std::string &reply) {
    std::string text = trim(reply);
    if (text.find('\n') != std::string::npos)
        throw Error(ErrorKind::MalformedResponse, "multi-line keyword reply");
    for (const std::string label : {"keyword:", "topic:", "answer:"})
        if (lower(text).rfind(label, 0) == 0)
            text = trim(text.substr(label.size()));
    for (std::string previous; previous != text;) {
        previous = text;
        while (!text.empty() && text.back() == '.')
            text.pop_back();
        text = trim(text);
        if (text.size() >= 2 && (text.front() == '"' || text.front() == '\'' || text.front() == '`') &&
            text.back() == text.front())
            text = trim(text.substr(1, text.size() - 2));
    }
    if (text.empty())
        throw Error(ErrorKind::MalformedResponse, "empty keyword reply");
    std::istringstream words(text);
    int count = 0;
    for (std::string w; words >> w;)
        ++count;
    if (count > 10)
        throw Error(ErrorKind::MalformedResponse, "reply is a sentence, not a keyword: " + text);
    return text;
}

std::string llm_topic_keyword(const std::string &title, const std::string &abstract, const LlmPromptProfile &profile,
                              LlmClient &llm) {
    return parse_keyword_response(llm.complete(topic_keyword_request(title, abstract, profile)));
}

nlohmann::json parse_json_reply(const std::string &reply) {
    std::string text = trim(reply);
    if (text.rfind("```", 0) == 0) {
        const auto body_start = text.find('\n');
        const auto fence_end = text.rfind("```");
        if (body_start != std::string::npos && fence_end != std::string::npos && fence_end > body_start)
            text = text.substr(body_start + 1, fence_end - body_start - 1);
    }
    try {
        auto json = nlohmann::json::parse(text);
        if (!json.is_object())
            throw Error(ErrorKind::MalformedResponse, "reply is JSON but not an object");
        return json;
    } catch (const nlohmann::json::exception &e) {
        throw Error(ErrorKind::MalformedResponse, std::string("reply is not valid JSON: ") + e.what());
    }
}

} // namespace revmetrics::retrieval
