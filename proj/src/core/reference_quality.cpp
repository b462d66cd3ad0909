#include "revmetrics/core/reference_quality.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "revmetrics/error.hpp"

namespace revmetrics::core {

double arq(std::span<const double> reference_tncsi) {
    if (reference_tncsi.empty())
        throw Error(ErrorKind::EmptyReferenceList, "no reference TNCSI values");
    double sum = 0.0;
    for (const double v : reference_tncsi) {
        if (!(v >= 0.0 && v <= 1.0))
            throw Error(ErrorKind::InvalidArgument, "reference TNCSI outside [0,1]");
        sum += v;
    }
    return sum / static_cast<double>(reference_tncsi.size());
}

std::int64_t median_semesters(std::span<const std::int64_t> reference_ages_months) {
    if (reference_ages_months.empty())
        throw Error(ErrorKind::EmptyReferenceList, "no reference ages");
    std::vector<std::int64_t> semesters;
    semesters.reserve(reference_ages_months.size());
    for (const auto months : reference_ages_months) {
        if (months < 0)
            throw Error(ErrorKind::InvalidArgument, "negative reference age");
        semesters.push_back(months / 6);
    }
    const auto mid = semesters.begin() + static_cast<std::ptrdiff_t>((semesters.size() - 1) / 2);
    std::nth_element(semesters.begin(), mid, semesters.end());
    return *mid;
}

double rqm_continuous(double arq_value, double s_mp, double beta) {
    return -std::expm1(-beta * std::exp(-(1.0 - arq_value) * s_mp));
}

double rqm(const RqmInputs &inputs) {
    if (!(inputs.arq >= 0.0 && inputs.arq <= 1.0))
        throw Error(ErrorKind::InvalidArgument, "ARQ outside [0,1]");
    if (inputs.s_mp < 0)
        throw Error(ErrorKind::InvalidArgument, "negative S_mp");
    if (!(inputs.beta > 0.0) || !std::isfinite(inputs.beta))
        throw Error(ErrorKind::InvalidArgument, "beta must be positive");
    return rqm_continuous(inputs.arq, static_cast<double>(inputs.s_mp), inputs.beta);
}

double beta_objective(double beta, double l_s, double r_s, double arq_bar) {
    return rqm_continuous(arq_bar, l_s, beta) - rqm_continuous(arq_bar, r_s, beta);
}

double optimize_beta(double l_s, double r_s, double arq_bar, BetaSearchRange range) {
    if (!(l_s < r_s) || !std::isfinite(l_s) || !std::isfinite(r_s) || l_s < 0.0)
        throw Error(ErrorKind::InvalidInterval, "semester interval must satisfy 0 <= l_s < r_s");
    if (!(range.lo > 0.0 && range.lo < range.hi) || !std::isfinite(range.hi))
        throw Error(ErrorKind::InvalidInterval, "beta search range must satisfy 0 < lo < hi");
    if (!(arq_bar >= 0.0 && arq_bar <= 1.0))
        throw Error(ErrorKind::InvalidArgument, "mean ARQ outside [0,1]");
    const double k_l = std::exp(-(1.0 - arq_bar) * l_s);
    const double k_r = std::exp(-(1.0 - arq_bar) * r_s);
    if (k_l - k_r <= 1e-12 * k_l)
        throw Error(ErrorKind::FlatObjective, "objective is identically zero when mean ARQ is 1");

    const auto f = [&](double beta) { return beta_objective(beta, l_s, r_s, arq_bar); };
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = range.lo, b = range.hi;
    double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    for (int iter = 0; iter < 200 && (b - a) > 1e-10 * (1.0 + std::abs(a)); ++iter) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    const double best = 0.5 * (a + b);
    if (f(best) <= 1e-15)
        throw Error(ErrorKind::FlatObjective, "objective vanishes over the search range");
    return best;
}

} // namespace revmetrics::core
