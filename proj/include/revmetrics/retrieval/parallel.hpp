#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <optional>
#include <thread>
#include <type_traits>
#include <vector>

namespace revmetrics::retrieval {

inline constexpr std::size_t kDefaultWorkers = 4;

/// Applies fn to every item on a bounded pool of worker threads and returns the
/// results in input order. The first exception (by input position) is rethrown
/// after all workers finish.
template <typename T, typename Fn>
auto parallel_map(const std::vector<T> &items, Fn fn, std::size_t workers = kDefaultWorkers)
    -> std::vector<std::invoke_result_t<Fn &, const T &>> {
    using R = std::invoke_result_t<Fn &, const T &>;
    std::vector<std::optional<R>> slots(items.size());
    std::vector<std::exception_ptr> errors(items.size());
    std::atomic<std::size_t> next{0};
    const auto work = [&] {
        for (std::size_t i = next++; i < items.size(); i = next++) {
            try {
                slots[i].emplace(fn(items[i]));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t count = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(items.size(), 1));
    if (count == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < count; ++w)
            pool.emplace_back(work);
        for (auto &t : pool)
            t.join();
    }
    for (const auto &e : errors)
        if (e)
            std::rethrow_exception(e);
    std::vector<R> out;
    out.reserve(items.size());
    for (auto &s : slots)
        out.push_back(std::move(*s));
    return out;
}

} // namespace revmetrics::retrieval
