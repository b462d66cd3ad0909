#include "revmetrics/core/update_index.hpp"

#include <cmath>
#include <string>

#include "revmetrics/error.hpp"

namespace revmetrics::core {

double rad(std::int64_t m_pc, const AgingPolynomial &poly, double step_years) {
    if (m_pc < 0)
        throw Error(ErrorKind::InvalidArgument, "negative months since publication");
    if (!(step_years > 0.0) || !std::isfinite(step_years))
        throw Error(ErrorKind::InvalidArgument, "trapezoid step must be positive");
    if (m_pc == 0)
        return 0.0;
    const double upper = static_cast<double>(m_pc) / 12.0;
    double total = 0.0;
    double x = 0.0;
    double fx = poly(0.0);
    while (x < upper) {
        const double next = (upper - x <= step_years * (1.0 + 1e-9)) ? upper : x + step_years;
        const double fnext = poly(next);
        total += 0.5 * (next - x) * (fx + fnext);
        x = next;
        fx = fnext;
    }
    return total;
}

double cdr(std::int64_t n_pc, std::int64_t n_mp) {
    if (n_mp <= 0)
        throw Error(ErrorKind::ZeroBaseline, "no relevant publications before the review (N_mp = " +
                                                 std::to_string(n_mp) + ")");
    if (n_pc < 0)
        throw Error(ErrorKind::InvalidArgument, "negative publication count");
    return static_cast<double>(n_pc) / static_cast<double>(n_mp);
}

double rui(double cdr_value, double rad_value, const RuiWeights &weights) {
    return weights.p * cdr_value + weights.q * rad_value;
}

} // namespace revmetrics::core
