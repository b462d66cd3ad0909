#include <doctest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "revmetrics/core/similarity.hpp"
#include "revmetrics/error.hpp"

using namespace revmetrics;
using namespace revmetrics::core;

TEST_CASE("normalized_edit_distance examples") {
    CHECK(normalized_edit_distance("abc", "abc") == 0.0);
    CHECK(normalized_edit_distance("abc", "abd") == doctest::Approx(1.0 / 3.0));
    CHECK(normalized_edit_distance("", "xy") == 1.0);
    CHECK(normalized_edit_distance("", "") == 0.0);
    CHECK(normalized_edit_distance("object detection", "few-shot object detection") ==
          doctest::Approx(9.0 / 25.0));
    // code points, not bytes
    CHECK(normalized_edit_distance("Bézier", "Bezier") == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("normalized_edit_distance behaves like a metric on keyword pairs") {
    const std::vector<std::string> corpus{"object detection",  "target detection", "object localization",
                                          "face recognition",  "face detection",   "gan",
                                          "adversarial networks", "",             "vision transformer",
                                          "visual tracking",   "object tracking",  "3d reconstruction"};
    for (const auto &a : corpus)
        for (const auto &b : corpus) {
            const double ab = normalized_edit_distance(a, b);
            CHECK(ab == normalized_edit_distance(b, a));
            CHECK(ab >= 0.0);
            CHECK(ab <= 1.0);
            CHECK((ab == 0.0) == (a == b));
            for (const auto &c : corpus)
                CHECK(ab <= normalized_edit_distance(a, c) + normalized_edit_distance(c, b) + 1e-12);
        }
}

TEST_CASE("utf8 round trip") {
    const std::string text = "naïve – 東京 🚀";
    CHECK(encode_utf8(decode_utf8(text)) == text);
    CHECK(decode_utf8(text).size() == 12);
    CHECK(decode_utf8("\xff"
                      "a")
              .size() == 2);
}

TEST_CASE("kl_divergence examples") {
    const std::vector<double> p{4, 1, 7};
    CHECK(kl_divergence(p, p) == 0.0);

    const double eps = 1e-9;
    const double expected = std::log((1 + eps) / eps) / (1 + 2 * eps);
    CHECK(expected == doctest::Approx(20.7232657965).epsilon(1e-10));
    CHECK(kl_divergence(std::vector<double>{1, 0}, std::vector<double>{0, 1}, eps) ==
          doctest::Approx(expected).epsilon(1e-9));

    const std::vector<double> a{3, 1}, b{1, 1};
    CHECK(kl_divergence(a, b) == doctest::Approx(0.13081203594113697).epsilon(1e-8));
    CHECK(kl_divergence(b, a) == doctest::Approx(0.14384103622589042).epsilon(1e-8));
    CHECK(kl_divergence(a, b) != kl_divergence(b, a));

    // mirror-image histograms happen to be symmetric
    const std::vector<double> m1{3, 1}, m2{1, 3};
    CHECK(kl_divergence(m1, m2) == doctest::Approx(kl_divergence(m2, m1)).epsilon(1e-12));
}

TEST_CASE("kl_divergence is non-negative (Gibbs)") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> bins(1, 40), count(0, 30);
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = bins(rng);
        std::vector<double> p(n), q(n);
        for (int i = 0; i < n; ++i) {
            p[i] = count(rng);
            q[i] = count(rng);
        }
        CHECK(kl_divergence(p, q) >= 0.0);
        CHECK(kl_divergence(p, p) == 0.0);
    }
}

TEST_CASE("kl_divergence rejects mismatched bins") {
    try {
        kl_divergence(std::vector<double>{1, 2}, std::vector<double>{1, 2, 3});
        FAIL("expected BinMismatch");
    } catch (const Error &e) {
        CHECK(e.kind() == ErrorKind::BinMismatch);
    }
}
