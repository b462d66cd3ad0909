#pragma once

#include <chrono>
#include <cstdint>
#include <span>
#include <vector>

namespace revmetrics::core {

/// New citations per calendar month, oldest first. window_end is the first month
/// *not* covered (the current month when built by the retrieval layer).
class CitationSeries {
public:
    CitationSeries(std::vector<std::int64_t> monthly_counts, std::chrono::year_month window_end);
    explicit CitationSeries(std::vector<std::int64_t> monthly_counts);

    const std::vector<std::int64_t> &monthly_counts() const noexcept { return counts_; }
    std::chrono::year_month window_end() const noexcept { return window_end_; }
    std::size_t length() const noexcept { return counts_.size(); }

private:
    std::vector<std::int64_t> counts_;
    std::chrono::year_month window_end_;
};

struct ControlPoint {
    double x = 0.0;
    double y = 0.0;
};

/// Tangent vector of a Bezier curve.
struct Tangent {
    double x = 0.0;
    double y = 0.0;
    double slope() const { return y / x; }
};

/// Bezier curve of degree n = l - 1 through (month index, count) control points.
class BezierTrend {
public:
    explicit BezierTrend(const CitationSeries &series);

    const std::vector<ControlPoint> &control_points() const noexcept { return points_; }
    int degree() const noexcept { return static_cast<int>(points_.size()) - 1; }

    /// Point on the curve, t in [0,1].
    ControlPoint evaluate(double t) const;
    /// C'(t), evaluated on the hodograph by de Casteljau.
    Tangent derivative(double t) const;

private:
    std::vector<ControlPoint> points_;
};

/// Bernstein basis polynomial B_{i,n}(t).
double bernstein(int i, int n, double t);

/// Tangent at the a-th sample parameter t = a/n. Throws IndexOutOfRange.
Tangent bezier_tangent(const BezierTrend &trend, int a);

/// Mean tangent slope over the l sample parameters 0, 1/n, ..., 1.
double iei_average(const CitationSeries &series);

/// sum_a w_a * slope_a / (n + 1). Throws LengthMismatch if weights.size() != l.
double iei_weighted(const CitationSeries &series, std::span<const double> weights);

/// Slope of C'(1) = n (P_n - P_{n-1}), i.e. the final month-to-month increment.
double iei_instantaneous(const CitationSeries &series);

} // namespace revmetrics::core
