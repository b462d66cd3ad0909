#include "revmetrics/analysis/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "revmetrics/error.hpp"

namespace revmetrics::analysis {

namespace {

std::string trim(const std::string &text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos)
        return {};
    return text.substr(first, text.find_last_not_of(" \t\r\n") - first + 1);
}

double pearson_of(std::span<const double> x, std::span<const double> y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

bool constant(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

} // namespace

DescriptiveStats descriptive_stats(std::span<const double> values) {
    if (values.empty())
        throw Error(ErrorKind::EmptyInput, "descriptive statistics need at least one value");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    DescriptiveStats s;
    s.count = sorted.size();
    s.min = sorted.front();
    s.max = sorted.back();
    s.mean = std::clamp(std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size()), s.min,
                        s.max);
    const std::size_t mid = sorted.size() / 2;
    s.median = sorted.size() % 2 ? sorted[mid] : sorted[mid - 1] + (sorted[mid] - sorted[mid - 1]) / 2.0;
    std::size_t best = 0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i])
            ++j;
        if (j - i > best) {
            best = j - i;
            s.mode = sorted[i];
        }
        i = j;
    }
    return s;
}

std::vector<double> average_ranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && values[order[j]] == values[order[i]])
            ++j;
        const double rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k)
            ranks[order[k]] = rank;
        i = j;
    }
    return ranks;
}

double correlation_p_value(double r, std::size_t n) {
    if (n < 3)
        throw Error(ErrorKind::InvalidArgument, "p-value needs n >= 3");
    if (std::abs(r) >= 1.0)
        return 0.0;
    const double df = static_cast<double>(n - 2);
    const double t = std::abs(r) * std::sqrt(df / (1.0 - r * r));
    const boost::math::students_t dist(df);
    return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, t)));
}

Correlation correlations(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw Error(ErrorKind::LengthMismatch,
                    "x has " + std::to_string(x.size()) + " values, y has " + std::to_string(y.size()));
    if (x.size() < 3)
        throw Error(ErrorKind::InvalidArgument, "correlation needs at least 3 pairs");
    if (constant(x) || constant(y))
        throw Error(ErrorKind::ConstantInput, "correlation undefined for a constant input");
    Correlation c;
    c.n = x.size();
    c.pearson_r = pearson_of(x, y);
    const auto rx = average_ranks(x), ry = average_ranks(y);
    c.spearman_rho = pearson_of(rx, ry);
    c.pearson_p = correlation_p_value(c.pearson_r, c.n);
    c.spearman_p = correlation_p_value(c.spearman_rho, c.n);
    return c;
}

std::vector<double> gaussian_smooth(const std::vector<int> &years, const std::vector<double> &values, double sigma) {
    if (years.size() != values.size())
        throw Error(ErrorKind::LengthMismatch, "years and values differ in length");
    if (!(sigma >= 0.0) || !std::isfinite(sigma))
        throw Error(ErrorKind::InvalidArgument, "smoothing sigma must be a non-negative number");
    if (sigma == 0.0)
        return values;
    const double reach = 3.0 * sigma;
    std::vector<double> out(values.size());
    for (std::size_t j = 0; j < years.size(); ++j) {
        double weighted = 0, total = 0;
        for (std::size_t i = 0; i < years.size(); ++i) {
            const double d = static_cast<double>(years[i] - years[j]);
            if (std::abs(d) > reach)
                continue;
            const double w = std::exp(-d * d / (2.0 * sigma * sigma));
            weighted += w * values[i];
            total += w;
        }
        out[j] = weighted / total;
    }
    return out;
}

FeatureTrend yearly_feature_trend(const std::vector<std::pair<int, snapshot::FeatureVector>> &rows, double sigma) {
    std::map<int, std::vector<snapshot::FeatureVector>> by_year;
    for (const auto &[year, fv] : rows) {
        snapshot::validate(fv);
        by_year[year].push_back(fv);
    }
    FeatureTrend trend;
    for (const auto &[year, list] : by_year) {
        trend.years.push_back(year);
        trend.reviews_per_year.push_back(list.size());
    }
    for (const auto &name : snapshot::feature_names()) {
        std::vector<double> proportions;
        for (const auto &[year, list] : by_year) {
            double ones = 0;
            for (const auto &fv : list)
                ones += snapshot::feature_value(fv, name);
            proportions.push_back(ones / static_cast<double>(list.size()));
        }
        trend.smoothed.emplace_back(name, gaussian_smooth(trend.years, proportions, sigma));
        trend.raw.emplace_back(name, std::move(proportions));
    }
    return trend;
}

std::pair<std::vector<double>, std::vector<double>> citation_histograms(std::span<const std::int64_t> a,
                                                                        std::span<const std::int64_t> b,
                                                                        std::size_t bins) {
    if (a.empty() || b.empty())
        throw Error(ErrorKind::EmptyInput, "histograms need two non-empty samples");
    if (bins == 0)
        throw Error(ErrorKind::InvalidArgument, "histograms need at least one bin");
    std::vector<std::int64_t> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    std::sort(pooled.begin(), pooled.end());
    // nearest-rank percentile
    const auto rank = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(pooled.size())));
    const double upper = std::max<double>(1.0, static_cast<double>(pooled[std::max<std::size_t>(rank, 1) - 1]));
    const double width = upper / static_cast<double>(bins);
    const auto fill = [&](std::span<const std::int64_t> sample) {
        std::vector<double> h(bins + 1, 0.0);
        for (const auto v : sample) {
            const double x = static_cast<double>(std::max<std::int64_t>(v, 0));
            const std::size_t bin =
                x > upper ? bins : std::min(bins - 1, static_cast<std::size_t>(std::floor(x / width)));
            h[bin] += 1.0;
        }
        return h;
    };
    return {fill(a), fill(b)};
}

std::vector<SynonymGroup> parse_synonym_groups(const std::string &text) {
    std::vector<SynonymGroup> groups;
    std::istringstream in(text);
    std::size_t number = 0;
    for (std::string line; std::getline(in, line);) {
        ++number;
        const std::string trimmed = trim(line);
        if (trimmed.empty() || trimmed.front() == '#')
            continue;
        std::vector<std::string> terms;
        std::istringstream parts(trimmed);
        for (std::string term; std::getline(parts, term, '|');)
            terms.push_back(trim(term));
        if (terms.size() < 2 || std::any_of(terms.begin(), terms.end(), [](const auto &t) { return t.empty(); }))
            throw Error(ErrorKind::ParseError,
                        "line " + std::to_string(number) + ": expected 'anchor|term|...' with non-empty terms");
        groups.push_back({terms.front(), std::vector<std::string>(terms.begin() + 1, terms.end())});
    }
    return groups;
}

RobustnessResult synonym_robustness(const std::vector<SynonymGroup> &groups, const SampleSource &samples,
                                    double epsilon, std::size_t bins) {
    if (groups.empty())
        throw Error(ErrorKind::EmptyInput, "no synonym groups");
    RobustnessResult result;
    for (const auto &group : groups) {
        if (group.comparisons.empty())
            throw Error(ErrorKind::InvalidArgument, "group '" + group.anchor + "' has no comparison terms");
        const auto anchor = samples(group.anchor);
        GroupDivergence g{group.anchor, {}, 0.0};
        for (const auto &term : group.comparisons) {
            const auto other = samples(term);
            const auto [p, q] = citation_histograms(anchor, other, bins);
            g.terms.push_back({term, core::kl_divergence(p, q, epsilon)});
        }
        double sum = 0;
        for (const auto &t : g.terms)
            sum += t.kl;
        g.mean_kl = sum / static_cast<double>(g.terms.size());
        result.groups.push_back(std::move(g));
    }
    double sum = 0;
    for (const auto &g : result.groups)
        sum += g.mean_kl;
    result.overall = sum / static_cast<double>(result.groups.size());
    return result;
}

} // namespace revmetrics::analysis
