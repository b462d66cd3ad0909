#include <cstdlib>
#include <iostream>

#include "revmetrics/cli/cli.hpp"

int main(int argc, char **argv) {
    revmetrics::cli::CliContext context{std::cout, std::cerr, {}, [] {
                                            return std::make_shared<revmetrics::retrieval::HttplibTransport>();
                                        }};
    for (const char *name : {"S2_API_KEY", "LLM_API_KEY", "LLM_BASE_URL"})
        if (const char *value = std::getenv(name))
            context.env[name] = value;
    return revmetrics::cli::run_cli({argv + 1, argv + argc}, context);
}
