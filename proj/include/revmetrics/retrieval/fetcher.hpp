#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "revmetrics/retrieval/transport.hpp"

namespace revmetrics::retrieval {

/// Spaces request start times at least 1/R seconds apart (plus a 1% guard), so
/// no sliding one-second window ever holds more than R requests. Thread-safe.
class RateLimiter {
public:
    explicit RateLimiter(double requests_per_second);
    void acquire();
    double requests_per_second() const { return rps_; }

private:
    double rps_;
    std::chrono::steady_clock::duration interval_;
    std::mutex mutex_;
    std::optional<std::chrono::steady_clock::time_point> last_;
};

/// Process-wide limiters keyed by remote host.
class RateLimiterRegistry {
public:
    static RateLimiterRegistry &global();
    std::shared_ptr<RateLimiter> for_host(const std::string &host, double requests_per_second);

private:
    std::mutex mutex_;
    std::map<std::string, std::shared_ptr<RateLimiter>> limiters_;
};

/// Persistent store for successful response bodies, keyed by HttpRequest::key().
class ResponseCache {
public:
    virtual ~ResponseCache() = default;
    virtual std::optional<std::string> get(const std::string &key) = 0;
    virtual void put(const std::string &key, const std::string &body) = 0;
};

class MemoryResponseCache : public ResponseCache {
public:
    std::optional<std::string> get(const std::string &key) override;
    void put(const std::string &key, const std::string &body) override;
    std::size_t size() const;

private:
    mutable std::mutex mutex_;
    std::map<std::string, std::string> entries_;
};

struct RetryPolicy {
    int attempts = 3;
    std::chrono::milliseconds base_delay{500};
    /// Fraction of the backoff delay added as uniform random jitter.
    double jitter = 0.5;
};

struct FetcherOptions {
    /// 0 disables throttling (fixture replay).
    double requests_per_second = 1.0;
    /// Overrides the process-wide per-host limiter when set.
    std::shared_ptr<RateLimiter> limiter;
    RetryPolicy retry;
};

/// Transport + cache + throttling + retry. Successful (2xx) bodies are cached;
/// 429 and 5xx responses and transport failures are retried with exponential
/// backoff, then surface as RateLimited or NetworkError. Other statuses are
/// returned to the caller uncached.
class Fetcher {
public:
    Fetcher(std::shared_ptr<Transport> transport, std::shared_ptr<ResponseCache> cache = nullptr,
            FetcherOptions options = {});

    HttpResponse fetch(const HttpRequest &request);

    Transport &transport() { return *transport_; }

private:
    std::shared_ptr<RateLimiter> limiter_for(const std::string &url);

    std::shared_ptr<Transport> transport_;
    std::shared_ptr<ResponseCache> cache_;
    FetcherOptions options_;
};

} // namespace revmetrics::retrieval
