#pragma once

#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "casq/normal.hpp"

namespace casq {

// Multi-equilibrium threshold for the cascade map: sqrt(2*pi).  Below it the
// fixed-point equation has a unique solution for every starting level.
double kappa_critical();

// Economic inputs.  The initial-solvency margin can be given either as a
// balance sheet (assets, liabilities) or directly as the idiosyncratic
// default probability q; the two are interchangeable through
// ln(L/A) = mu + sigma * N^{-1}(q).
struct ModelParams {
    double mu = 0.0;     // mean log asset return
    double sigma = 0.0;  // return volatility, > 0
    double rho = 0.0;    // asset correlation, in [0, 1)
    double a = 0.0;      // fire-sale impact constant, >= 0

    std::optional<double> assets;           // A > 0
    std::optional<double> liabilities;      // 0 < L < A
    std::optional<Probability> idio_q;      // q in (0, 1)

    static ModelParams balance_sheet(double assets, double liabilities, double mu, double sigma,
                                     double rho, double a);
    static ModelParams idiosyncratic(Probability q, double sigma, double rho, double a,
                                     double mu = 0.0);

    // Throws std::domain_error naming the offending field.
    void validate() const;
};

// Per-market-draw quantities for a realisation Z = z of the common factor.
struct ScenarioParams {
    double alpha;    // sigma * sqrt(1 - rho)
    double beta;     // mu + sigma * sqrt(rho) * z
    double kappa;    // a / alpha
    double delta_1;  // first-wave default threshold
    double z;        // the market factor draw
};

ScenarioParams derive_scenario(const ModelParams& params, double z);

// One application of the cascade map F(x) = delta_1 + kappa * N(x).
double map_F(double x, const ScenarioParams& scenario);

struct CascadeStep {
    int wave;      // k >= 1
    double delta;  // delta_k
    Probability q; // q_k = N(delta_k)
};

// The orbit delta_1, F(delta_1), F(F(delta_1)), ... of the cascade map.
// delta_inf always holds the last iterate; `converged` tells whether the
// successive-difference stop fired before max_iter.
struct CascadeTrajectory {
    std::vector<CascadeStep> steps;
    bool converged = false;
    double delta_inf = std::numeric_limits<double>::quiet_NaN();
    int iterations_used = 0;
};

CascadeTrajectory run_orbit(double delta_1, double kappa, double tol = 1e-12,
                            int max_iter = 1'000'000);
CascadeTrajectory run_orbit(const ScenarioParams& scenario, double tol = 1e-12,
                            int max_iter = 1'000'000);

enum class Stability { stable, unstable, neutral };

struct FixedPoint {
    double location;
    Stability stability;
};

// All fixed points of the map, sorted ascending.  Every fixed point sits at
// or above delta_1, so the selected cascade limit is simply the smallest.
struct FixedPointSet {
    std::vector<FixedPoint> points;  // size 1..3
    double selected;
};

FixedPointSet fixed_points(double delta_1, double kappa, double tol = 1e-12);
FixedPointSet fixed_points(const ScenarioParams& scenario, double tol = 1e-12);

enum class Regime { single, multi };

// Critical-point geometry of f(x) = x - kappa * N(x).  In the multi regime
// (kappa > sqrt(2*pi)) f has a local maximum y1 at x1 = -x0 and a local
// minimum y0 at x0; x2 > x0 is the abscissa where f climbs back to y1.
// The x0/x1/y0/y1/x2 fields are NaN in the single regime.
struct BifurcationGeometry {
    double kappa_0;
    Regime regime;
    double x0, x1, y0, y1, x2;
};

BifurcationGeometry bifurcation_geometry(double kappa);

// Total-loss map g: the cascade limit delta_inf as a function of delta_1.
// Nondecreasing, g(delta_1) >= delta_1; in the multi regime it jumps from x1
// to x2 as delta_1 crosses y1 (at exactly y1 it returns x1).
double total_loss_map_g(double delta_1, double kappa, double tol = 1e-12);

// Wave maps g_k (delta_k as a function of delta_1) and their derivatives:
//   g_1 = id,  g_k(t) = t + kappa * N(g_{k-1}(t)),
//   g_1' = 1,  g_k'(t) = 1 + kappa * phi(g_{k-1}(t)) * g_{k-1}'(t).
double g_k(double delta_1, double kappa, int k);
double g_k_prime(double delta_1, double kappa, int k);

// Inverse wave maps h_k = g_k^{-1}, solved on the bracket [y - kappa, y];
// tol bounds the inversion residual |g_k(h_k(y)) - y|.
double h_k(double y, double kappa, int k, double tol = 1e-12);
double h_k_prime(double y, double kappa, int k, double tol = 1e-12);

// Limit h = lim_k h_k.  Coincides with f(x) = x - kappa * N(x) for
// kappa <= kappa_critical(); above it the segment of f between x1 and x2 is
// replaced by the horizontal plateau at height y1.
double h_limit(double y, double kappa);

// Derivative of h: 1 - kappa * phi(y) off the plateau, 0 on it.  Continuous
// at x1 (f'(x1) = 0), discontinuous at x2 where the right limit is returned.
double h_limit_prime(double y, double kappa);

// Wave index: a finite cascade wave count k >= 1 or the infinite-wave limit.
class Wave {
  public:
    static Wave infinity() { return Wave(kInfinite); }
    static Wave finite(int k) {
        if (k < 1) throw std::domain_error("wave: index must be >= 1");
        return Wave(k);
    }
    bool is_infinite() const { return k_ == kInfinite; }
    int index() const {
        if (is_infinite()) throw std::logic_error("wave: the infinite wave has no index");
        return k_;
    }
    friend bool operator==(const Wave&, const Wave&) = default;

  private:
    explicit Wave(int k) : k_(k) {}
    static constexpr int kInfinite = -1;
    int k_;
};

}  // namespace casq
