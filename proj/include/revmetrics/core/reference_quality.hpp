#pragma once

#include <cstdint>
#include <span>

namespace revmetrics::core {

inline constexpr double kDefaultBeta = 5.0;

struct RqmInputs {
    double arq = 0.0;       ///< average reference quality, [0,1]
    std::int64_t s_mp = 0;  ///< median reference age in semesters
    double beta = kDefaultBeta;
};

/// Mean TNCSI of a review's references. Throws EmptyReferenceList.
double arq(std::span<const double> reference_tncsi);

/// Lower median of floor(age/6) over reference ages given in months.
std::int64_t median_semesters(std::span<const std::int64_t> reference_ages_months);

/// Shifted-Gompertz reference quality: 1 - exp(-beta * exp(-(1 - arq) * s_mp)).
double rqm(const RqmInputs &inputs);

/// RQM as a function of a continuous semester count, for calibration work.
double rqm_continuous(double arq, double s_mp, double beta);

struct BetaSearchRange {
    double lo = 0.01;
    double hi = 100.0;
};

/// Calibration objective: integral of |dRQM/dS| over [l_s, r_s] at fixed beta,
/// which collapses to RQM(l_s) - RQM(r_s) because RQM is monotone in S.
double beta_objective(double beta, double l_s, double r_s, double arq_bar);

/// Beta maximizing beta_objective over the search range (golden-section search;
/// the objective is unimodal in beta). Throws InvalidInterval for a bad S or
/// beta interval and FlatObjective when arq_bar makes the objective vanish.
double optimize_beta(double l_s, double r_s, double arq_bar, BetaSearchRange range = {});

} // namespace revmetrics::core
