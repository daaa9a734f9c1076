#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "casq/normal.hpp"
#include "oracles.hpp"

using casq::std_normal_cdf;
using casq::std_normal_pdf;
using casq::std_normal_quantile;
namespace oracle = casq::testing;

TEST_CASE("pdf matches the defining formula") {
    // 1/sqrt(2*pi) and the direct evaluation at 1, frozen from a
    // high-precision run of exp(-x^2/2)/sqrt(2*pi).
    CHECK(std_normal_pdf(0.0) == doctest::Approx(0.3989422804014327).epsilon(0.0).scale(1e-9));
    CHECK(std::abs(std_normal_pdf(1.0) - 0.24197072451914335) < 1e-9);
    CHECK(std_normal_pdf(2.3) == std_normal_pdf(-2.3));
    for (double x : {-6.0, -1.3, 0.4, 2.7, 5.5})
        CHECK(std::abs(std_normal_pdf(x) - oracle::phi_oracle(x)) < 1e-15);
}

TEST_CASE("cdf reference values") {
    CHECK(std_normal_cdf(0.0) == 0.5);
    CHECK(std::abs(std_normal_cdf(1.7) + std_normal_cdf(-1.7) - 1.0) < 1e-14);
    // quadrature oracle value: N(1.959964) = 0.97500000090...
    CHECK(std::abs(oracle::cdf_oracle(1.959964) - 0.975) < 1e-6);
    CHECK(std::abs(std_normal_cdf(1.959964) - 0.975) < 1e-6);
    CHECK(std::abs(std_normal_cdf(1.959964) - oracle::cdf_oracle(1.959964)) < 1e-13);
}

TEST_CASE("cdf agrees with the quadrature oracle on a grid") {
    for (double x = -8.0; x <= 8.0; x += 0.25)
        CHECK(std::abs(std_normal_cdf(x) - oracle::cdf_oracle(x)) < 1e-13);
}

TEST_CASE("cdf is strictly increasing") {
    std::mt19937_64 rng(7121);
    std::uniform_real_distribution<double> draw(-8.0, 8.0);
    for (int i = 0; i < 2000; ++i) {
        double x1 = draw(rng), x2 = draw(rng);
        if (x1 == x2) continue;
        if (x1 > x2) std::swap(x1, x2);
        CHECK(std_normal_cdf(x1) < std_normal_cdf(x2));
    }
}

TEST_CASE("derivative of the cdf is the pdf") {
    const double h = 1e-5;
    for (double x = -5.0; x <= 5.0; x += 0.125) {
        const double fd = (std_normal_cdf(x + h) - std_normal_cdf(x - h)) / (2.0 * h);
        CHECK(std::abs(fd - std_normal_pdf(x)) < 1e-6);
    }
}

TEST_CASE("quantile reference values") {
    CHECK(std_normal_quantile(0.5) == 0.0);
    // bisection against the quadrature CDF gives -1.6448536269514722
    CHECK(std::abs(oracle::quantile_oracle(0.05) - (-1.6448536269514722)) < 1e-12);
    CHECK(std::abs(std_normal_quantile(0.05) - (-1.6448536)) < 1e-6);
    CHECK(std::abs(std_normal_quantile(0.05) - (-1.6448536269514722)) < 1e-12);
}

TEST_CASE("quantile round trips through the cdf") {
    for (double x : {-3.0, -1.0, 0.0, 1.0, 3.0})
        CHECK(std::abs(std_normal_quantile(std_normal_cdf(x)) - x) < 1e-9);

    // log-spaced p covering both tails down to 1e-12
    for (double e = -12.0; e <= -0.31; e += 0.13) {
        const double p = std::pow(10.0, e);
        CHECK(std::abs(std_normal_cdf(std_normal_quantile(p)) - p) <= 1e-9);
        CHECK(std::abs(std_normal_cdf(std_normal_quantile(1.0 - p)) - (1.0 - p)) <= 1e-9);
    }
}

TEST_CASE("quantile is strictly increasing") {
    std::mt19937_64 rng(90210);
    std::uniform_real_distribution<double> draw(1e-12, 1.0 - 1e-12);
    for (int i = 0; i < 2000; ++i) {
        double p1 = draw(rng), p2 = draw(rng);
        if (p1 == p2) continue;
        if (p1 > p2) std::swap(p1, p2);
        CHECK(std_normal_quantile(p1) < std_normal_quantile(p2));
    }
}

TEST_CASE("domain errors") {
    const double nan = std::nan("");
    const double inf = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(std_normal_pdf(nan), std::domain_error);
    CHECK_THROWS_AS(std_normal_pdf(inf), std::domain_error);
    CHECK_THROWS_AS(std_normal_cdf(nan), std::domain_error);
    CHECK_THROWS_AS(std_normal_cdf(-inf), std::domain_error);
    CHECK_THROWS_AS(std_normal_quantile(0.0), std::domain_error);
    CHECK_THROWS_AS(std_normal_quantile(1.0), std::domain_error);
    CHECK_THROWS_AS(std_normal_quantile(-0.25), std::domain_error);
    CHECK_THROWS_AS(std_normal_quantile(2.0), std::domain_error);
    CHECK_THROWS_AS(std_normal_quantile(nan), std::domain_error);
}
