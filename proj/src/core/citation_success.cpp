#include "revmetrics/core/citation_success.hpp"

#include <cmath>
#include <string>

#include "revmetrics/error.hpp"

namespace revmetrics::core {

ExponentialFit fit_exponential_mle(std::span<const std::int64_t> citation_counts) {
    if (citation_counts.empty())
        throw Error(ErrorKind::EmptySample, "no citation counts to fit");
    double sum = 0.0;
    for (const auto count : citation_counts) {
        if (count < 0)
            throw Error(ErrorKind::InvalidArgument, "negative citation count " + std::to_string(count));
        sum += static_cast<double>(count);
    }
    if (sum == 0.0)
        throw Error(ErrorKind::DegenerateSample,
                    "all " + std::to_string(citation_counts.size()) + " citation counts are zero");
    const auto n = static_cast<std::int64_t>(citation_counts.size());
    return ExponentialFit{static_cast<double>(n) / sum, n};
}

double tncsi(std::int64_t cite_num, const ExponentialFit &fit) {
    if (!(fit.lambda > 0.0) || !std::isfinite(fit.lambda) || fit.sample_size < 1)
        throw Error(ErrorKind::InvalidArgument, "invalid exponential fit");
    if (cite_num < 0)
        throw Error(ErrorKind::InvalidArgument, "negative citation count");
    const double value = -std::expm1(-fit.lambda * static_cast<double>(cite_num));
    // Saturates to 1.0 in double precision once lambda*cite_num exceeds ~37.
    return value < 1.0 ? value : std::nextafter(1.0, 0.0);
}

} // namespace revmetrics::core
