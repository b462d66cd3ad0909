#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "revmetrics/retrieval/transport.hpp"

namespace revmetrics::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

using TransportFactory = std::function<std::shared_ptr<retrieval::Transport>()>;

struct CliContext {
    std::ostream &out;
    std::ostream &err;
    /// Environment variables consulted: S2_API_KEY, LLM_API_KEY, LLM_BASE_URL.
    std::map<std::string, std::string> env;
    /// Live network transport. Never called for --offline or --fixtures runs.
    TransportFactory live_transport;
};

/// Config keys accepted in the key=value file.
const std::vector<std::string> &config_keys();

/// "key = value" lines; blank lines and '#' comments are ignored. Throws
/// ParseError for malformed lines and unknown keys.
std::map<std::string, std::string> parse_config(const std::string &text);

/// Runs one command line (without the program name). Returns 0 on success,
/// 1 on operational errors, 2 on usage errors.
int run_cli(const std::vector<std::string> &args, CliContext &context);

} // namespace revmetrics::cli
