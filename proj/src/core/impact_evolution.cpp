#include "revmetrics/core/impact_evolution.hpp"

#include <cmath>
#include <string>

#include "revmetrics/error.hpp"

namespace revmetrics::core {

CitationSeries::CitationSeries(std::vector<std::int64_t> monthly_counts, std::chrono::year_month window_end)
    : counts_(std::move(monthly_counts)), window_end_(window_end) {
    if (counts_.size() < 2)
        throw Error(ErrorKind::InvalidArgument,
                    "citation series needs at least 2 months, got " + std::to_string(counts_.size()));
    for (const auto c : counts_)
        if (c < 0)
            throw Error(ErrorKind::InvalidArgument, "negative monthly citation count");
}

CitationSeries::CitationSeries(std::vector<std::int64_t> monthly_counts)
    : CitationSeries(std::move(monthly_counts), std::chrono::year{0} / std::chrono::January) {}

BezierTrend::BezierTrend(const CitationSeries &series) {
    const auto &counts = series.monthly_counts();
    points_.reserve(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i)
        points_.push_back({static_cast<double>(i), static_cast<double>(counts[i])});
}

namespace {

ControlPoint de_casteljau(std::vector<ControlPoint> work, double t) {
    const double s = 1.0 - t;
    for (std::size_t level = work.size(); level > 1; --level)
        for (std::size_t i = 0; i + 1 < level; ++i)
            work[i] = {s * work[i].x + t * work[i + 1].x, s * work[i].y + t * work[i + 1].y};
    return work.front();
}

} // namespace

ControlPoint BezierTrend::evaluate(double t) const { return de_casteljau(points_, t); }

Tangent BezierTrend::derivative(double t) const {
    const int n = degree();
    std::vector<ControlPoint> hodograph;
    hodograph.reserve(points_.size() - 1);
    for (std::size_t i = 0; i + 1 < points_.size(); ++i)
        hodograph.push_back({points_[i + 1].x - points_[i].x, points_[i + 1].y - points_[i].y});
    const ControlPoint d = de_casteljau(std::move(hodograph), t);
    return {n * d.x, n * d.y};
}

double bernstein(int i, int n, double t) {
    if (i < 0 || i > n)
        return 0.0;
    // C(n,i) built incrementally; exact in double for n well beyond any practical window.
    double binom = 1.0;
    for (int k = 1; k <= i; ++k)
        binom = binom * (n - i + k) / k;
    return binom * std::pow(1.0 - t, n - i) * std::pow(t, i);
}

Tangent bezier_tangent(const BezierTrend &trend, int a) {
    const int n = trend.degree();
    if (a < 0 || a > n)
        throw Error(ErrorKind::IndexOutOfRange,
                    "tangent index " + std::to_string(a) + " outside 0.." + std::to_string(n));
    return trend.derivative(static_cast<double>(a) / n);
}

double iei_average(const CitationSeries &series) {
    const BezierTrend trend(series);
    const int n = trend.degree();
    double total = 0.0;
    for (int a = 0; a <= n; ++a)
        total += bezier_tangent(trend, a).slope();
    return total / (n + 1);
}

double iei_weighted(const CitationSeries &series, std::span<const double> weights) {
    if (weights.size() != series.length())
        throw Error(ErrorKind::LengthMismatch, std::to_string(weights.size()) + " weights for " +
                                                   std::to_string(series.length()) + " months");
    const BezierTrend trend(series);
    const int n = trend.degree();
    double total = 0.0;
    for (int a = 0; a <= n; ++a)
        total += weights[a] * bezier_tangent(trend, a).slope();
    return total / (n + 1);
}

double iei_instantaneous(const CitationSeries &series) {
    const auto &p = BezierTrend(series).control_points();
    const int n = static_cast<int>(p.size()) - 1;
    const Tangent end{n * (p[n].x - p[n - 1].x), n * (p[n].y - p[n - 1].y)};
    return end.slope();
}

} // namespace revmetrics::core
