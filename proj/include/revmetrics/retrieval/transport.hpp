#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

namespace revmetrics::retrieval {

struct HttpRequest {
    std::string method = "GET";
    std::string url;
    std::vector<std::pair<std::string, std::string>> headers;
    std::string body;

    /// Identity of the request for caching and fixture lookup; headers are
    /// excluded so API keys never end up in recorded data.
    std::string key() const { return method + " " + url + "\n" + body; }
};

struct HttpResponse {
    int status = 0;
    std::string body;
};

/// One request/response exchange. Implementations throw Error(NetworkError)
/// when no response could be obtained at all.
class Transport {
public:
    virtual ~Transport() = default;
    virtual HttpResponse send(const HttpRequest &request) = 0;
    /// True when a failed send cannot succeed on retry (offline, replay).
    virtual bool failures_are_final() const { return false; }
};

/// Live HTTP(S) transport.
class HttplibTransport : public Transport {
public:
    explicit HttplibTransport(std::chrono::seconds timeout = std::chrono::seconds{30});
    HttpResponse send(const HttpRequest &request) override;

private:
    std::chrono::seconds timeout_;
};

/// Refuses every request; used for --offline runs.
class OfflineTransport : public Transport {
public:
    HttpResponse send(const HttpRequest &request) override;
    bool failures_are_final() const override { return true; }
};

/// Replays recorded exchanges from newline-delimited JSON, one
/// {"request": {"method","url","body"}, "response": {"status","body"}} per line.
class FixtureTransport : public Transport {
public:
    FixtureTransport() = default;
    /// Loads a single .ndjson file, or every *.ndjson file in a directory.
    static std::shared_ptr<FixtureTransport> load(const std::filesystem::path &path);

    void add(const HttpRequest &request, HttpResponse response);
    void add_ndjson(std::istream &in, const std::string &source_name);
    std::size_t size() const;
    HttpResponse send(const HttpRequest &request) override;
    bool failures_are_final() const override { return true; }

private:
    mutable std::mutex mutex_;
    std::map<std::string, HttpResponse> exchanges_;
};

/// Forwards to another transport and appends every exchange to an NDJSON file
/// in the format FixtureTransport reads.
class RecordingTransport : public Transport {
public:
    RecordingTransport(std::shared_ptr<Transport> inner, const std::filesystem::path &output);
    HttpResponse send(const HttpRequest &request) override;
    bool failures_are_final() const override { return inner_->failures_are_final(); }

private:
    std::shared_ptr<Transport> inner_;
    std::mutex mutex_;
    std::ofstream out_;
};

/// Counts requests and records when each one was sent.
class CountingTransport : public Transport {
public:
    explicit CountingTransport(std::shared_ptr<Transport> inner);
    HttpResponse send(const HttpRequest &request) override;
    bool failures_are_final() const override { return inner_->failures_are_final(); }

    std::size_t count() const { return count_.load(); }
    std::vector<std::chrono::steady_clock::time_point> timestamps() const;
    std::vector<std::string> urls() const;

private:
    std::shared_ptr<Transport> inner_;
    std::atomic<std::size_t> count_{0};
    mutable std::mutex mutex_;
    std::vector<std::chrono::steady_clock::time_point> timestamps_;
    std::vector<std::string> urls_;
};

/// Percent-encodes everything except RFC 3986 unreserved characters.
std::string url_encode(std::string_view text);

struct UrlParts {
    std::string scheme;
    std::string host;
    int port = 0;
    std::string path_and_query;
};
UrlParts split_url(const std::string &url);

} // namespace revmetrics::retrieval
