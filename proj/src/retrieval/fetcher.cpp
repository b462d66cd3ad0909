#include "revmetrics/retrieval/fetcher.hpp"

#include <random>
#include <thread>

#include "revmetrics/error.hpp"

namespace revmetrics::retrieval {

RateLimiter::RateLimiter(double requests_per_second) : rps_(requests_per_second) {
    if (!(requests_per_second > 0.0))
        throw Error(ErrorKind::InvalidArgument, "rate limit must be positive");
    interval_ = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(1.01 / requests_per_second));
}

void RateLimiter::acquire() {
    // Holding the lock while sleeping queues waiters in arrival order.
    std::lock_guard lock(mutex_);
    if (last_) {
        const auto earliest = *last_ + interval_;
        if (std::chrono::steady_clock::now() < earliest)
            std::this_thread::sleep_until(earliest);
    }
    last_ = std::chrono::steady_clock::now();
}

RateLimiterRegistry &RateLimiterRegistry::global() {
    static RateLimiterRegistry registry;
    return registry;
}

std::shared_ptr<RateLimiter> RateLimiterRegistry::for_host(const std::string &host, double requests_per_second) {
    std::lock_guard lock(mutex_);
    auto &slot = limiters_[host];
    if (!slot || slot->requests_per_second() != requests_per_second)
        slot = std::make_shared<RateLimiter>(requests_per_second);
    return slot;
}

std::optional<std::string> MemoryResponseCache::get(const std::string &key) {
    std::lock_guard lock(mutex_);
    const auto it = entries_.find(key);
    if (it == entries_.end())
        return std::nullopt;
    return it->second;
}

void MemoryResponseCache::put(const std::string &key, const std::string &body) {
    std::lock_guard lock(mutex_);
    entries_[key] = body;
}

std::size_t MemoryResponseCache::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

Fetcher::Fetcher(std::shared_ptr<Transport> transport, std::shared_ptr<ResponseCache> cache, FetcherOptions options)
    : transport_(std::move(transport)), cache_(std::move(cache)), options_(std::move(options)) {
    if (!transport_)
        throw Error(ErrorKind::InvalidArgument, "fetcher needs a transport");
    if (options_.retry.attempts < 1)
        options_.retry.attempts = 1;
}

std::shared_ptr<RateLimiter> Fetcher::limiter_for(const std::string &url) {
    if (options_.limiter)
        return options_.limiter;
    if (options_.requests_per_second <= 0.0)
        return nullptr;
    return RateLimiterRegistry::global().for_host(split_url(url).host, options_.requests_per_second);
}

HttpResponse Fetcher::fetch(const HttpRequest &request) {
    const std::string key = request.key();
    if (cache_)
        if (auto body = cache_->get(key))
            return HttpResponse{200, std::move(*body)};

    const auto limiter = limiter_for(request.url);
    thread_local std::mt19937 jitter_rng{std::random_device{}()};
    std::string last_failure;
    bool rate_limited = false;

    for (int attempt = 0; attempt < options_.retry.attempts; ++attempt) {
        if (attempt > 0) {
            const double base = static_cast<double>(options_.retry.base_delay.count()) * (1 << (attempt - 1));
            std::uniform_real_distribution<double> jitter(0.0, options_.retry.jitter * base);
            std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(base + jitter(jitter_rng)));
        }
        if (limiter)
            limiter->acquire();
        HttpResponse response;
        try {
            response = transport_->send(request);
        } catch (const Error &e) {
            if (e.kind() != ErrorKind::NetworkError)
                throw;
            if (transport_->failures_are_final())
                throw;
            last_failure = e.detail();
            rate_limited = false;
            continue;
        }
        if (response.status == 429) {
            rate_limited = true;
            last_failure = "HTTP 429 from " + request.url;
            continue;
        }
        if (response.status >= 500) {
            rate_limited = false;
            last_failure = "HTTP " + std::to_string(response.status) + " from " + request.url;
            continue;
        }
        if (response.status >= 200 && response.status < 300 && cache_)
            cache_->put(key, response.body);
        return response;
    }
    const std::string detail = last_failure + " after " + std::to_string(options_.retry.attempts) + " attempts";
    throw Error(rate_limited ? ErrorKind::RateLimited : ErrorKind::NetworkError, detail);
}

} // namespace revmetrics::retrieval
