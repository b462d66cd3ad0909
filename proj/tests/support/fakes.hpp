#pragma once

#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <string>

#include "revmetrics/retrieval/fetcher.hpp"
#include "revmetrics/retrieval/transport.hpp"

namespace fakes {

using namespace revmetrics::retrieval;

inline std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

inline std::string fixture(const std::string &relative) {
    return std::string(REVMETRICS_FIXTURE_DIR) + "/" + relative;
}

/// Fetcher without throttling and with near-instant retries.
inline std::shared_ptr<Fetcher> fast_fetcher(std::shared_ptr<Transport> transport,
                                             std::shared_ptr<ResponseCache> cache = nullptr) {
    FetcherOptions options;
    options.requests_per_second = 0;
    options.retry.base_delay = std::chrono::milliseconds{1};
    return std::make_shared<Fetcher>(std::move(transport), std::move(cache), options);
}

/// Answers every request through a callback.
class ScriptedTransport : public Transport {
public:
    using Script = std::function<HttpResponse(const HttpRequest &, int call)>;
    explicit ScriptedTransport(Script script) : script_(std::move(script)) {}
    HttpResponse send(const HttpRequest &request) override { return script_(request, calls_++); }
    int calls() const { return calls_; }

private:
    Script script_;
    int calls_ = 0;
};

} // namespace fakes
