#include "casq/loss.hpp"

#include <cmath>
#include <stdexcept>

namespace casq {

namespace {

// N^{-1} diverges at the endpoints; beyond these clamps the CDF saturates.
constexpr double kEdgeClamp = 1e-10;
// Residual target for the h_k inversions inside the distribution formulas,
// tight enough that finite-difference checks of the CDF resolve the PDF.
constexpr double kInversionTol = 1e-13;

void require_interior(double x, const char* who) {
    if (!(x > 0.0 && x < 1.0))
        throw std::domain_error(std::string(who) + ": x must lie in (0, 1)");
}

// H(u) for the spec's wave index.
double transform_value(double u, const DistributionSpec& spec) {
    if (spec.wave.is_infinite()) return h_limit(u, spec.kappa);
    const int k = spec.wave.index();
    if (k == 1) return u;
    return h_k(u, spec.kappa, k, kInversionTol);
}

double a_of_transformed(double h_value, const DistributionSpec& spec) {
    return (std::sqrt(1.0 - spec.rho) * h_value - std_normal_quantile(spec.q)) /
           std::sqrt(spec.rho);
}

}  // namespace

void DistributionSpec::validate() const {
    if (!(q > 0.0 && q < 1.0))
        throw std::domain_error("q: must lie in (0, 1)");
    if (!(rho > 0.0 && rho < 1.0))
        throw std::domain_error("rho: must lie strictly inside (0, 1) for loss distributions");
    if (!(std::isfinite(kappa) && kappa >= 0.0))
        throw std::domain_error("kappa: must be finite and >= 0");
}

double a_transform(double x, const DistributionSpec& spec) {
    spec.validate();
    require_interior(x, "a_transform");
    const double u = std_normal_quantile(x);
    return a_of_transformed(transform_value(u, spec), spec);
}

Probability loss_cdf(double x, const DistributionSpec& spec) {
    spec.validate();
    require_interior(x, "loss_cdf");
    if (x <= kEdgeClamp) return 0.0;
    if (x >= 1.0 - kEdgeClamp) return 1.0;
    const double u = std_normal_quantile(x);
    return std_normal_cdf(a_of_transformed(transform_value(u, spec), spec));
}

double loss_pdf(double x, const DistributionSpec& spec) {
    spec.validate();
    require_interior(x, "loss_pdf");
    if (x <= kEdgeClamp || x >= 1.0 - kEdgeClamp) return 0.0;

    const double u = std_normal_quantile(x);
    double h_value;
    double h_prime;
    if (spec.wave.is_infinite()) {
        const auto geom = bifurcation_geometry(spec.kappa);
        if (geom.regime == Regime::multi && x == std_normal_cdf(geom.x2)) {
            // Exactly at the jump: report the right limit.
            h_value = geom.y1;
            h_prime = 1.0 - spec.kappa * std_normal_pdf(geom.x2);
        } else if (geom.regime == Regime::multi && u > geom.x1 && u < geom.x2) {
            h_value = geom.y1;
            h_prime = 0.0;
        } else {
            h_value = u - spec.kappa * std_normal_cdf(u);
            h_prime = 1.0 - spec.kappa * std_normal_pdf(u);
        }
    } else if (spec.wave.index() == 1) {
        h_value = u;
        h_prime = 1.0;
    } else {
        const int k = spec.wave.index();
        h_value = h_k(u, spec.kappa, k, kInversionTol);
        h_prime = 1.0 / g_k_prime(h_value, spec.kappa, k);
    }
    if (h_prime == 0.0) return 0.0;

    const double a_value = a_of_transformed(h_value, spec);
    return std::sqrt((1.0 - spec.rho) / spec.rho) * h_prime * std_normal_pdf(a_value) /
           std_normal_pdf(u);
}

Probability vasicek_cdf(double x, Probability q, double rho) {
    DistributionSpec spec{q, rho, 0.0, Wave::finite(1)};
    return loss_cdf(x, spec);
}

double vasicek_pdf(double x, Probability q, double rho) {
    DistributionSpec spec{q, rho, 0.0, Wave::finite(1)};
    return loss_pdf(x, spec);
}

LossCurve tabulate(const DistributionSpec& spec, int grid_points, double x_min, double x_max) {
    spec.validate();
    if (grid_points < 2)
        throw std::domain_error("grid_points: must be >= 2");
    if (!(x_min > 0.0 && x_min < x_max && x_max < 1.0))
        throw std::domain_error("x_min/x_max: need 0 < x_min < x_max < 1");

    LossCurve curve;
    curve.grid.reserve(static_cast<std::size_t>(grid_points));
    for (int i = 0; i < grid_points; ++i) {
        const double t = static_cast<double>(i) / (grid_points - 1);
        const double x = x_min + (x_max - x_min) * t;
        curve.grid.push_back({x, loss_cdf(x, spec), loss_pdf(x, spec)});
    }

    if (spec.wave.is_infinite()) {
        const auto geom = bifurcation_geometry(spec.kappa);
        if (geom.regime == Regime::multi) {
            const double lo = std_normal_cdf(geom.x1);
            const double hi = std_normal_cdf(geom.x2);
            curve.gap = SupportGap{lo, hi};
            curve.jump = DensityJump{hi, 0.0, loss_pdf(hi, spec)};
        }
    }
    return curve;
}

}  // namespace casq
