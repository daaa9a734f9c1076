#pragma once

#include <optional>
#include <vector>

#include "casq/cascade.hpp"
#include "casq/normal.hpp"

namespace casq {

// Arguments of the closed-form loss distributions: the loss fraction after
// `wave` cascade waves (or after the cascade exhausts itself) under
// idiosyncratic default probability q, asset correlation rho and feedback
// strength kappa.
struct DistributionSpec {
    Probability q = 0.0;   // in (0, 1)
    double rho = 0.0;      // in (0, 1); the degenerate endpoints are rejected
    double kappa = 0.0;    // >= 0
    Wave wave = Wave::infinity();

    // Throws std::domain_error naming the offending field.
    void validate() const;
};

struct LossPoint {
    double x;         // loss fraction
    Probability cdf;
    double pdf;
};

// Loss interval (N(x1), N(x2)) that the total loss skips in the multi regime.
struct SupportGap {
    double lo;
    double hi;
};

// Density discontinuity at the upper gap edge.
struct DensityJump {
    double x;
    double pdf_left;
    double pdf_right;
};

struct LossCurve {
    std::vector<LossPoint> grid;
    std::optional<SupportGap> gap;
    std::optional<DensityJump> jump;
};

// A(x) = [sqrt(1-rho) * H(N^{-1}(x)) - N^{-1}(q)] / sqrt(rho), where H is the
// identity for wave 1, h_k for finite waves and h for the infinite limit.
double a_transform(double x, const DistributionSpec& spec);

// CDF N(A(x)) and its density.  Evaluation is clamped to
// [1e-10, 1 - 1e-10]: at or below the left clamp the CDF reports 0 (pdf 0),
// at or above the right clamp it reports 1 (pdf 0).  Arguments outside the
// open interval (0, 1) are domain errors.
Probability loss_cdf(double x, const DistributionSpec& spec);

// At the density jump N(x2) of the infinite-wave multi-regime distribution
// the right limit is returned.
double loss_pdf(double x, const DistributionSpec& spec);

// Single-wave closed forms (the kappa -> 0 / wave-1 baseline).
Probability vasicek_cdf(double x, Probability q, double rho);
double vasicek_pdf(double x, Probability q, double rho);

// Evaluates cdf/pdf on a uniform grid over [x_min, x_max] and annotates the
// support gap and density jump when the spec is infinite-wave with
// kappa above the critical value.
LossCurve tabulate(const DistributionSpec& spec, int grid_points, double x_min, double x_max);

}  // namespace casq
