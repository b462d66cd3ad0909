#pragma once

#include <cstdint>

namespace revmetrics::core {

/// Cubic citation-aging curve c3 x^3 + c2 x^2 + c1 x + c0, x in years.
struct AgingPolynomial {
    double c3 = -0.003;
    double c2 = 0.001;
    double c1 = 0.1267;
    double c0 = 0.0129;

    double operator()(double x) const { return ((c3 * x + c2) * x + c1) * x + c0; }
    double antiderivative(double x) const { return (((c3 / 4 * x + c2 / 3) * x + c1 / 2) * x + c0) * x; }
};

inline constexpr double kDefaultRadStepYears = 1.0 / 120.0;
/// The aging curve was fitted on six years of data.
inline constexpr std::int64_t kRadFittedMonths = 72;

/// Review aging degree: cumulative trapezoidal integral of the aging curve over
/// [0, m_pc / 12] years. The last panel is shortened so the grid ends exactly at
/// the upper limit.
double rad(std::int64_t m_pc, const AgingPolynomial &poly = {}, double step_years = kDefaultRadStepYears);

inline bool rad_extrapolates(std::int64_t m_pc) { return m_pc > kRadFittedMonths; }

/// Coverage difference ratio N_pc / N_mp. Throws ZeroBaseline when n_mp == 0.
double cdr(std::int64_t n_pc, std::int64_t n_mp);

struct RuiWeights {
    double p = 10.0;
    double q = 5.0;
};

double rui(double cdr_value, double rad_value, const RuiWeights &weights = {});

} // namespace revmetrics::core
