#include <doctest.h>

#include <cmath>
#include <random>

#include "revmetrics/core/update_index.hpp"
#include "revmetrics/error.hpp"
#include "support/oracles.hpp"

using namespace revmetrics;
using namespace revmetrics::core;

TEST_CASE("default aging polynomial coefficients") {
    const AgingPolynomial poly;
    CHECK(poly.c3 == -0.003);
    CHECK(poly.c2 == 0.001);
    CHECK(poly.c1 == 0.1267);
    CHECK(poly.c0 == 0.0129);
}

TEST_CASE("rad examples") {
    CHECK(rad(0) == 0.0);
    const double exact_one_year = -0.00075 + 0.001 / 3.0 + 0.06335 + 0.0129;
    CHECK(exact_one_year == doctest::Approx(0.07583).epsilon(1e-4));
    CHECK(std::abs(rad(12) - exact_one_year) <= 1e-4);
    CHECK(std::abs(rad(72) - oracle::cubic_integral(-0.003, 0.001, 0.1267, 0.0129, 6.0)) <= 1e-3);
}

TEST_CASE("rad trapezoid tracks the exact antiderivative") {
    for (std::int64_t m = 1; m <= 72; ++m) {
        const double exact = oracle::cubic_integral(-0.003, 0.001, 0.1267, 0.0129, m / 12.0);
        CHECK(std::abs(rad(m) - exact) <= 1e-4);
    }
}

TEST_CASE("rad step handling") {
    // A step that does not divide the interval still ends exactly at the limit.
    const AgingPolynomial linear{0.0, 0.0, 1.0, 0.0};
    CHECK(rad(12, linear, 0.3) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS_AS(rad(12, linear, 0.0), Error);
    CHECK_THROWS_AS(rad(-1), Error);
    CHECK(rad_extrapolates(73));
    CHECK_FALSE(rad_extrapolates(72));
}

TEST_CASE("cdr") {
    CHECK(cdr(250, 250) == 1.0);
    CHECK(cdr(0, 10) == 0.0);
    CHECK(cdr(300, 150) == 2.0);
    try {
        cdr(5, 0);
        FAIL("expected ZeroBaseline");
    } catch (const Error &e) {
        CHECK(e.kind() == ErrorKind::ZeroBaseline);
    }
}

TEST_CASE("rui is the weighted sum") {
    CHECK(rui(1.0, 0.2) == 11.0);
    CHECK(rui(0.0, 0.0) == 0.0);
    CHECK(rui(0.5, 0.07583) == doctest::Approx(5.37915).epsilon(1e-12));

    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    for (int i = 0; i < 100; ++i) {
        const double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
        CHECK(rui(a, c) == 10.0 * a + 5.0 * c);
        CHECK(rui(a + b, c + d) == doctest::Approx(rui(a, c) + rui(b, d)).epsilon(1e-14));
    }
    CHECK(rui(1.0, 1.0, {2.0, 3.0}) == 5.0);
}
