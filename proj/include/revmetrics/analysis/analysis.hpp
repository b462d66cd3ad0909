#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "revmetrics/core/similarity.hpp"
#include "revmetrics/snapshot/snapshot.hpp"

namespace revmetrics::analysis {

struct DescriptiveStats {
    double max = 0;
    double min = 0;
    double mean = 0;
    /// Average of the two middle values for even counts.
    double median = 0;
    /// Smallest of the most frequent values.
    double mode = 0;
    std::size_t count = 0;
};

/// Throws EmptyInput.
DescriptiveStats descriptive_stats(std::span<const double> values);

struct Correlation {
    double pearson_r = 0;
    double pearson_p = 0;
    double spearman_rho = 0;
    double spearman_p = 0;
    std::size_t n = 0;
};

/// Average ranks (1-based), ties sharing the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);

/// Pearson on raw values and Spearman on average ranks; two-sided p-values
/// from t = r*sqrt((n-2)/(1-r^2)) with n-2 degrees of freedom. Throws
/// LengthMismatch, InvalidArgument (n < 3), ConstantInput.
Correlation correlations(std::span<const double> x, std::span<const double> y);

/// Two-sided p-value of a correlation coefficient under the t approximation.
double correlation_p_value(double r, std::size_t n);

struct FeatureTrend {
    /// Years that have at least one review, ascending.
    std::vector<int> years;
    std::vector<std::size_t> reviews_per_year;
    /// feature name -> proportion per year, raw and smoothed.
    std::vector<std::pair<std::string, std::vector<double>>> raw;
    std::vector<std::pair<std::string, std::vector<double>>> smoothed;
};

inline constexpr double kDefaultTrendSigma = 1.0;

/// Gaussian smoothing over year distance: weights exp(-d^2 / 2 sigma^2) for
/// |d| <= 3 sigma, renormalized over the years present. sigma = 0 is the
/// identity. Throws InvalidArgument for negative sigma.
std::vector<double> gaussian_smooth(const std::vector<int> &years, const std::vector<double> &values, double sigma);

FeatureTrend yearly_feature_trend(const std::vector<std::pair<int, snapshot::FeatureVector>> &rows,
                                  double sigma = kDefaultTrendSigma);

inline constexpr std::size_t kDefaultHistogramBins = 20;

/// Shared binning of two citation samples: `bins` equal-width bins over
/// [0, pooled 99th percentile] plus one overflow bin.
std::pair<std::vector<double>, std::vector<double>> citation_histograms(std::span<const std::int64_t> a,
                                                                        std::span<const std::int64_t> b,
                                                                        std::size_t bins = kDefaultHistogramBins);

struct SynonymGroup {
    std::string anchor;
    std::vector<std::string> comparisons;
};

/// One group per non-blank line, terms separated by '|', anchor first.
/// Lines starting with '#' are comments. Throws ParseError.
std::vector<SynonymGroup> parse_synonym_groups(const std::string &text);

struct TermDivergence {
    std::string term;
    double kl = 0;
};

struct GroupDivergence {
    std::string anchor;
    std::vector<TermDivergence> terms;
    double mean_kl = 0;
};

struct RobustnessResult {
    std::vector<GroupDivergence> groups;
    double overall = 0;
};

using SampleSource = std::function<std::vector<std::int64_t>(const std::string &keyword)>;

/// KL(anchor || term) over shared citation histograms for every comparison
/// term; group value is the mean over terms, overall the mean over groups.
/// Errors from `samples` (EmptyResult) propagate.
RobustnessResult synonym_robustness(const std::vector<SynonymGroup> &groups, const SampleSource &samples,
                                    double epsilon = core::kDefaultKlEpsilon,
                                    std::size_t bins = kDefaultHistogramBins);

} // namespace revmetrics::analysis
