#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include "revmetrics/cli/cli.hpp"
#include "revmetrics/retrieval/transport.hpp"

namespace fakes {

/// Fresh directory removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("revmetrics_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    TempDir(const TempDir &) = delete;
    TempDir &operator=(const TempDir &) = delete;

    std::filesystem::path operator/(const std::string &name) const { return path_ / name; }
    std::string file(const std::string &name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

/// Thread-safe transport answering through a callback; records every URL.
class RoutedTransport : public revmetrics::retrieval::Transport {
public:
    using Route = std::function<revmetrics::retrieval::HttpResponse(const revmetrics::retrieval::HttpRequest &)>;
    explicit RoutedTransport(Route route) : route_(std::move(route)) {}
    revmetrics::retrieval::HttpResponse send(const revmetrics::retrieval::HttpRequest &request) override {
        {
            std::lock_guard lock(mutex_);
            urls_.push_back(request.url);
        }
        return route_(request);
    }
    std::vector<std::string> urls() const {
        std::lock_guard lock(mutex_);
        return urls_;
    }

private:
    Route route_;
    mutable std::mutex mutex_;
    std::vector<std::string> urls_;
};

struct CliRun {
    int code = -1;
    std::string out;
    std::string err;
};

/// Runs the CLI in-process. The live transport factory counts how often it is
/// asked for a transport and how many requests pass through what it returns.
class CliHarness {
public:
    std::map<std::string, std::string> env;
    std::shared_ptr<revmetrics::retrieval::Transport> live =
        std::make_shared<revmetrics::retrieval::OfflineTransport>();
    int factory_calls = 0;
    std::shared_ptr<revmetrics::retrieval::CountingTransport> counting;

    CliRun run(const std::vector<std::string> &args) {
        std::ostringstream out, err;
        revmetrics::cli::CliContext context{out, err, env, [this] {
                                                ++factory_calls;
                                                counting = std::make_shared<revmetrics::retrieval::CountingTransport>(live);
                                                return counting;
                                            }};
        CliRun result;
        result.code = revmetrics::cli::run_cli(args, context);
        result.out = out.str();
        result.err = err.str();
        return result;
    }

    std::size_t network_requests() const { return counting ? counting->count() : 0; }
};

} // namespace fakes
