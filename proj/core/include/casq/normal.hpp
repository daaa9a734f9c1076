#pragma once

namespace casq {

// Probabilities are plain doubles; the functions that produce or consume
// them enforce the [0, 1] (or open (0, 1)) range at their boundaries.
using Probability = double;

// Standard normal density phi(x) = exp(-x^2/2) / sqrt(2*pi).
// Throws std::domain_error for non-finite x.
double std_normal_pdf(double x);

// Standard normal CDF N(x), computed from the complementary error function
// so both tails keep full relative accuracy (|x| up to ~37 before underflow).
// Throws std::domain_error for non-finite x.
Probability std_normal_cdf(double x);

// Inverse of N on the open interval (0, 1).  Wichura's AS 241 rational
// approximations; |N(result) - p| stays far below 1e-9 over [1e-12, 1-1e-12].
// Throws std::domain_error for p outside (0, 1).
double std_normal_quantile(Probability p);

}  // namespace casq
