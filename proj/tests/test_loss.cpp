#include <doctest.h>

#include <cmath>

#include "casq/loss.hpp"
#include "oracles.hpp"

using namespace casq;
namespace oracle = casq::testing;

namespace {

DistributionSpec spec_of(double q, double rho, double kappa, Wave wave) {
    return DistributionSpec{q, rho, kappa, wave};
}

// Inverse of the loss CDF by bisection; used to pick test points where the
// distribution actually lives.
double cdf_inverse(const DistributionSpec& spec, double level) {
    double lo = 1e-9, hi = 1.0 - 1e-9;
    for (int i = 0; i < 200 && hi - lo > 1e-14; ++i) {
        const double mid = 0.5 * (lo + hi);
        (loss_cdf(mid, spec) < level ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("spec validation names the offending field") {
    CHECK_THROWS_WITH_AS(spec_of(0.0, 0.2, 1.0, Wave::infinity()).validate(),
                         doctest::Contains("q"), std::domain_error);
    CHECK_THROWS_WITH_AS(spec_of(0.05, 1.0, 1.0, Wave::infinity()).validate(),
                         doctest::Contains("rho"), std::domain_error);
    CHECK_THROWS_WITH_AS(spec_of(0.05, 0.0, 1.0, Wave::infinity()).validate(),
                         doctest::Contains("rho"), std::domain_error);
    CHECK_THROWS_WITH_AS(spec_of(0.05, 0.2, -1.0, Wave::infinity()).validate(),
                         doctest::Contains("kappa"), std::domain_error);
    CHECK_THROWS_AS(loss_cdf(0.0, spec_of(0.05, 0.2, 1.0, Wave::infinity())), std::domain_error);
    CHECK_THROWS_AS(loss_cdf(1.0, spec_of(0.05, 0.2, 1.0, Wave::infinity())), std::domain_error);
    CHECK_THROWS_AS(loss_pdf(-0.5, spec_of(0.05, 0.2, 1.0, Wave::infinity())), std::domain_error);
    CHECK_THROWS_AS(a_transform(1.5, spec_of(0.05, 0.2, 1.0, Wave::infinity())),
                    std::domain_error);
}

TEST_CASE("single-wave transform reference value") {
    // quantile oracle in the closed form:
    // A_1(0.05) = [sqrt(0.9) N^{-1}(0.05) - N^{-1}(0.02)] / sqrt(0.1)
    const double expected = (std::sqrt(0.9) * oracle::quantile_oracle(0.05) -
                             oracle::quantile_oracle(0.02)) / std::sqrt(0.1);
    CHECK(std::abs(expected - 1.5599634188317413) < 1e-10);
    const auto spec = spec_of(0.02, 0.1, 0.0, Wave::finite(1));
    CHECK(std::abs(a_transform(0.05, spec) - 1.5599634188317413) < 1e-10);
    CHECK(std::abs(vasicek_cdf(0.05, 0.02, 0.1) - 0.9406157369499836) < 1e-10);
}

TEST_CASE("transform sign at x = q") {
    // A_1(q) = N^{-1}(q) (sqrt(1-rho) - 1) / sqrt(rho): positive for q < 1/2
    for (double rho : {0.1, 0.5, 0.9}) {
        CHECK(a_transform(0.05, spec_of(0.05, rho, 0.0, Wave::finite(1))) > 0.0);
        CHECK(a_transform(0.7, spec_of(0.7, rho, 0.0, Wave::finite(1))) < 0.0);
    }
}

TEST_CASE("zero coupling collapses every wave to the single-wave transform") {
    for (Wave wave : {Wave::finite(2), Wave::finite(5), Wave::infinity()}) {
        const auto spec = spec_of(0.1, 0.3, 0.0, wave);
        const auto base = spec_of(0.1, 0.3, 0.0, Wave::finite(1));
        for (double x = 0.02; x < 1.0; x += 0.02)
            CHECK(a_transform(x, spec) == a_transform(x, base));
    }
}

TEST_CASE("vasicek median and density consistency") {
    const double q = 0.07, rho = 0.25;
    // A_1 crosses zero at x = N(N^{-1}(q)/sqrt(1-rho)), where the CDF is 1/2
    const double median = std_normal_cdf(std_normal_quantile(q) / std::sqrt(1.0 - rho));
    CHECK(std::abs(vasicek_cdf(median, q, rho) - 0.5) < 1e-12);

    const double h = 1e-5;
    for (double x = 0.01; x < 0.5; x += 0.01) {
        const double fd = (vasicek_cdf(x + h, q, rho) - vasicek_cdf(x - h, q, rho)) / (2.0 * h);
        const double pdf = vasicek_pdf(x, q, rho);
        CHECK(std::abs(fd - pdf) < 1e-6 * std::max(1.0, pdf));
    }
}

TEST_CASE("zero coupling reproduces the single-wave distribution exactly") {
    for (Wave wave : {Wave::finite(1), Wave::finite(2), Wave::finite(5), Wave::infinity()}) {
        const auto spec = spec_of(0.05, 0.2, 0.0, wave);
        for (int i = 1; i < 200; ++i) {
            const double x = static_cast<double>(i) / 200.0;
            CHECK(std::abs(loss_cdf(x, spec) - vasicek_cdf(x, 0.05, 0.2)) <= 1e-12);
            CHECK(std::abs(loss_pdf(x, spec) - vasicek_pdf(x, 0.05, 0.2)) <= 1e-12);
        }
    }
}

TEST_CASE("cdf is nondecreasing and clamped at the edges") {
    for (Wave wave : {Wave::finite(3), Wave::infinity()}) {
        const auto spec = spec_of(0.05, 0.2, 4.0, wave);
        double prev = 0.0;
        for (double x = 1e-6; x < 1.0; x += 1e-3) {
            const double value = loss_cdf(x, spec);
            CHECK(value >= prev);
            prev = value;
        }
        CHECK(loss_cdf(1e-12, spec) == 0.0);
        CHECK(loss_cdf(1.0 - 1e-12, spec) == 1.0);
        CHECK(loss_pdf(1e-12, spec) == 0.0);
        CHECK(loss_pdf(1.0 - 1e-12, spec) == 0.0);
    }
}

TEST_CASE("losses only grow with waves") {
    const auto inf_spec = spec_of(0.05, 0.2, 1.5, Wave::infinity());
    for (double x = 0.02; x < 0.98; x += 0.02) {
        double prev = loss_cdf(x, spec_of(0.05, 0.2, 1.5, Wave::finite(1)));
        for (int k = 2; k <= 6; ++k) {
            const double next = loss_cdf(x, spec_of(0.05, 0.2, 1.5, Wave::finite(k)));
            CHECK(next <= prev + 1e-12);
            prev = next;
        }
        CHECK(loss_cdf(x, inf_spec) <= prev + 1e-10);
    }
}

TEST_CASE("support gap of the total loss") {
    const auto geom = bifurcation_geometry(4.0);
    const auto spec = spec_of(0.05, 0.2, 4.0, Wave::infinity());
    const double gap_lo = std_normal_cdf(geom.x1);
    const double gap_hi = std_normal_cdf(geom.x2);

    // density identically zero inside, CDF flat
    const double plateau_cdf = loss_cdf(0.5 * (gap_lo + gap_hi), spec);
    for (double t = 0.05; t < 1.0; t += 0.05) {
        const double x = gap_lo + t * (gap_hi - gap_lo);
        CHECK(loss_pdf(x, spec) == 0.0);
        CHECK(std::abs(loss_cdf(x, spec) - plateau_cdf) < 1e-13);
    }
    // left limit at the jump is zero, right limit strictly positive
    CHECK(loss_pdf(gap_hi - 1e-9, spec) == 0.0);
    CHECK(loss_pdf(gap_hi, spec) > 0.0);
    CHECK(loss_pdf(gap_hi + 1e-9, spec) > 0.0);
}

TEST_CASE("density integrates to one") {
    // quadrature over the support plus CDF tail mass
    for (double kappa : {1.0, 4.0}) {
        const auto spec = spec_of(0.05, 0.2, kappa, Wave::infinity());
        auto density = [&](double x) { return loss_pdf(x, spec); };
        const double lo = 1e-6, hi = 1.0 - 1e-6;
        double mass = 0.0;
        const auto geom = bifurcation_geometry(kappa);
        if (geom.regime == Regime::multi) {
            const double gap_lo = std_normal_cdf(geom.x1);
            const double gap_hi = std_normal_cdf(geom.x2);
            mass = oracle::integrate(density, lo, gap_lo, 1e-10) +
                   oracle::integrate(density, gap_hi, hi, 1e-10);
        } else {
            mass = oracle::integrate(density, lo, hi, 1e-10);
        }
        mass += loss_cdf(lo, spec) + (1.0 - loss_cdf(hi, spec));
        CHECK(std::abs(mass - 1.0) < 1e-6);
    }
}

TEST_CASE("pdf matches central differences of the cdf") {
    for (double kappa : {1.0, 4.0}) {
        for (Wave wave : {Wave::finite(1), Wave::finite(3), Wave::infinity()}) {
            const auto spec = spec_of(0.05, 0.2, kappa, wave);
            const double x_lo = cdf_inverse(spec, 0.01);
            const double x_hi = cdf_inverse(spec, 0.99);
            double gap_lo = 2.0, gap_hi = 2.0;
            if (wave.is_infinite()) {
                const auto geom = bifurcation_geometry(kappa);
                if (geom.regime == Regime::multi) {
                    gap_lo = std_normal_cdf(geom.x1);
                    gap_hi = std_normal_cdf(geom.x2);
                }
            }
            const double h = 1e-5;
            int used = 0;
            for (int i = 1; i < 250 && used < 100; ++i) {
                const double x = x_lo + (x_hi - x_lo) * static_cast<double>(i) / 250.0;
                if (x > gap_lo - 1e-3 && x < gap_hi + 1e-3) continue;  // skip the flat segment
                ++used;
                const double fd = (loss_cdf(x + h, spec) - loss_cdf(x - h, spec)) / (2.0 * h);
                const double pdf = loss_pdf(x, spec);
                CHECK(std::abs(fd - pdf) <= 1e-6 * std::max(std::abs(pdf), 1e-8));
            }
            CHECK(used >= 100);
        }
    }
}

TEST_CASE("tabulate annotates the gap only when it exists") {
    const auto plain = tabulate(spec_of(0.05, 0.2, 0.0, Wave::infinity()), 64, 0.01, 0.9);
    CHECK_FALSE(plain.gap.has_value());
    CHECK_FALSE(plain.jump.has_value());
    CHECK(plain.grid.size() == 64);
    CHECK(plain.grid.front().x == 0.01);
    CHECK(plain.grid.back().x == 0.9);

    const auto finite_wave = tabulate(spec_of(0.05, 0.2, 4.0, Wave::finite(4)), 64, 0.01, 0.9);
    CHECK_FALSE(finite_wave.gap.has_value());

    const auto curve = tabulate(spec_of(0.05, 0.2, 4.0, Wave::infinity()), 301, 0.01, 0.999);
    REQUIRE(curve.gap.has_value());
    REQUIRE(curve.jump.has_value());
    const auto geom = bifurcation_geometry(4.0);
    CHECK(std::abs(curve.gap->lo - std_normal_cdf(geom.x1)) < 1e-9);
    CHECK(std::abs(curve.gap->hi - std_normal_cdf(geom.x2)) < 1e-9);
    CHECK(curve.jump->x == curve.gap->hi);
    CHECK(curve.jump->pdf_left == 0.0);
    CHECK(curve.jump->pdf_right > 0.0);

    double prev = 0.0;
    for (const auto& point : curve.grid) {
        CHECK(point.cdf >= prev);
        CHECK(point.pdf >= 0.0);
        if (point.x > curve.gap->lo && point.x < curve.gap->hi) CHECK(point.pdf == 0.0);
        prev = point.cdf;
    }
}

TEST_CASE("tabulate rejects bad grids") {
    const auto spec = spec_of(0.05, 0.2, 1.0, Wave::infinity());
    CHECK_THROWS_WITH_AS(tabulate(spec, 1, 0.1, 0.9), doctest::Contains("grid_points"),
                         std::domain_error);
    CHECK_THROWS_WITH_AS(tabulate(spec, 16, 0.9, 0.1), doctest::Contains("x_min"),
                         std::domain_error);
    CHECK_THROWS_AS(tabulate(spec, 16, 0.0, 0.9), std::domain_error);
}
