#pragma once

#include <cstdint>
#include <span>

namespace revmetrics::core {

/// Exponential decay fitted to a topic's citation-count sample.
struct ExponentialFit {
    double lambda = 1.0;
    std::int64_t sample_size = 1;
};

/// Maximum-likelihood rate of an exponential over the raw sample: count / sum.
/// Throws EmptySample for no counts, DegenerateSample when every count is zero,
/// InvalidArgument for negative counts.
ExponentialFit fit_exponential_mle(std::span<const std::int64_t> citation_counts);

/// Topic-normalized citation success index: the fitted CDF evaluated at cite_num,
/// i.e. 1 - exp(-lambda * cite_num). Always in [0, 1).
double tncsi(std::int64_t cite_num, const ExponentialFit &fit);

} // namespace revmetrics::core
