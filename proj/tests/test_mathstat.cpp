#include <cmath>

#include "wbgsec/mathstat.hpp"

#include <doctest.h>

using namespace wbgsec;

TEST_CASE("regularized_gamma_q matches closed forms") {
    // Q(1, x) = exp(-x)
    for (double x : {0.1, 0.5, 1.0, 2.0, 5.0, 20.0})
        CHECK(regularized_gamma_q(1.0, x) == doctest::Approx(std::exp(-x)).epsilon(1e-12));
    // Q(1/2, x) = erfc(sqrt(x))
    for (double x : {0.01, 0.25, 1.0, 4.0, 9.0})
        CHECK(regularized_gamma_q(0.5, x) ==
              doctest::Approx(std::erfc(std::sqrt(x))).epsilon(1e-12));
    // Q(a, 0) = 1
    CHECK(regularized_gamma_q(3.7, 0.0) == 1.0);
    // chi-squared with 4 dof at its mean: Q(2, 2) = 3 e^-2
    CHECK(regularized_gamma_q(2.0, 2.0) == doctest::Approx(3.0 * std::exp(-2.0)).epsilon(1e-12));
    CHECK_THROWS(regularized_gamma_q(0.0, 1.0));
    CHECK_THROWS(regularized_gamma_q(1.0, -1.0));
}

TEST_CASE("percentile interpolates") {
    std::vector<double> v{4.0, 1.0, 3.0, 2.0};
    CHECK(percentile(v, 0.0) == 1.0);
    CHECK(percentile(v, 100.0) == 4.0);
    CHECK(percentile(v, 50.0) == doctest::Approx(2.5));
    CHECK(percentile({7.0}, 90.0) == 7.0);
    CHECK_THROWS(percentile({}, 50.0));
    CHECK_THROWS(percentile(v, 101.0));
}

TEST_CASE("mean and sample stddev") {
    std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    CHECK(mean(v) == doctest::Approx(2.5));
    CHECK(sample_stddev(v) == doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-12));
    CHECK_THROWS(sample_stddev({1.0}));
}
