#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "flowlab/stats.hpp"

using namespace flowlab;

TEST_CASE("normal_cdf reference values") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
    CHECK(normal_cdf(-1.0) == doctest::Approx(0.15865525393145707).epsilon(1e-12));
    CHECK(normal_cdf(1.96) == doctest::Approx(0.9750021048517795).epsilon(1e-12));
}

TEST_CASE("wilson interval contains the point estimate and stays in [0,1]") {
    for (std::size_t k : {std::size_t{0}, std::size_t{1}, std::size_t{50}, std::size_t{100}}) {
        const auto w = wilson_interval(k, 100);
        CHECK(w.lo <= w.p_hat);
        CHECK(w.p_hat <= w.hi);
        CHECK(w.lo >= 0.0);
        CHECK(w.hi <= 1.0);
    }
    // near-degenerate ensemble: all successes
    const auto w = wilson_interval(100, 100);
    CHECK(w.p_hat == 1.0);
    CHECK(w.lo > 0.9);
    CHECK_THROWS_AS(wilson_interval(2, 0), std::invalid_argument);
    CHECK_THROWS_AS(wilson_interval(3, 2), std::invalid_argument);
}

TEST_CASE("two-sample KS statistic") {
    CHECK(ks_two_sample({1, 2, 3, 4}, {1, 2, 3, 4}) == doctest::Approx(0.0));
    CHECK(ks_two_sample({1, 2, 3}, {10, 11, 12}) == doctest::Approx(1.0));
    // hand-checked: F1 jumps at 1,2; F2 at 1.5: sup diff at x=1 is 1/2
    CHECK(ks_two_sample({1, 2}, {1.5, 1.5}) == doctest::Approx(0.5));
    CHECK_THROWS_AS(ks_two_sample({}, {1.0}), std::invalid_argument);
}

TEST_CASE("linear fit recovers an exact line") {
    std::vector<double> x{0, 1, 2, 3, 4};
    std::vector<double> y;
    for (double v : x) y.push_back(-2.0 * v + 0.5);
    const auto f = linear_fit(x, y);
    CHECK(f.slope == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(f.intercept == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("chi2 2x2") {
    // balanced table has no association
    CHECK(chi2_2x2(50, 50, 50, 50) == doctest::Approx(0.0));
    // textbook example
    const double v = chi2_2x2(20, 30, 30, 20);
    CHECK(v == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(chi2_2x2(0, 0, 5, 5) == 0.0);
}
