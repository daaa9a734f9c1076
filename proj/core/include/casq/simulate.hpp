#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "casq/normal.hpp"
#include "casq/rng.hpp"

namespace casq {

struct BalanceSheet {
    double assets;
    double liabilities;
};

// Calibrates a unit-asset balance sheet whose idiosyncratic default
// probability equals q: ln(L/A) = mu + sigma * N^{-1}(q).
BalanceSheet balance_for_q(Probability q, double mu, double sigma);

// Finite-network Monte Carlo configuration.  Balance sheets are homogeneous
// unless per_node is populated (then it must have exactly n entries).
// Unlike the analytic model, sigma = 0 is allowed here: the shock simply
// degenerates to the deterministic return mu.
struct NetworkConfig {
    std::size_t n = 1;
    BalanceSheet balance{1.0, 0.5};
    std::vector<BalanceSheet> per_node;
    double mu = 0.0;
    double sigma = 0.0;            // >= 0
    double rho = 0.0;              // in [0, 1)
    double a = 0.0;                // fire-sale impact, >= 0
    std::size_t trials = 1;
    std::uint64_t master_seed = 0;
    std::optional<double> fixed_z; // pin the market factor (conditional runs)

    // Throws std::domain_error naming the offending field.
    void validate() const;
};

// One draw of the correlated shocks: the market factor and the post-shock
// asset values A_i * exp(mu + sigma * (sqrt(rho) Z + sqrt(1-rho) eps_i)).
struct ShockSample {
    double z;
    std::vector<double> post_shock_assets;
};

ShockSample sample_shocks(const NetworkConfig& config, TrialRng& rng);

// Wave-by-wave outcome of one trial.  wave_losses records the cumulative
// defaulted fraction after each wave that produced new defaults (wave 1 is
// always recorded, possibly as 0); entries are strictly increasing.
struct TrialResult {
    double z = 0.0;
    std::vector<Probability> wave_losses;
    int waves = 0;
    Probability q_final = 0.0;
};

// Runs the cascade on given post-shock values: wave 1 defaults where
// A_{i,1} <= L_i, later waves apply the discount exp(-a q_k) to the
// original post-shock values (not compounded), defaults are absorbing,
// and the loop stops the first time a wave adds no new default.
TrialResult run_cascade(std::span<const double> post_shock_assets,
                        std::span<const double> liabilities, double a);

// Shock draw + cascade for the substream keyed by (master_seed, trial_index).
TrialResult run_trial(const NetworkConfig& config, std::uint64_t trial_index);

struct TrialSummary {
    double z;
    int waves;
    Probability q_final;
};

struct EnsembleSummary {
    double mean = 0.0;
    double variance = 0.0;
    double q05 = 0.0, q25 = 0.0, q50 = 0.0, q75 = 0.0, q95 = 0.0;
};

struct EnsembleResult {
    std::vector<TrialSummary> trials;     // indexed by trial
    std::vector<Probability> samples;     // q_final per trial
    EnsembleSummary summary;
    std::optional<double> ks_vs_analytic; // filled by callers that have a CDF
};

// Runs config.trials independent trials.  The result is identical for equal
// configs regardless of `threads`; reductions happen in trial order.
EnsembleResult run_ensemble(const NetworkConfig& config, unsigned threads = 1);

// Two-sided Kolmogorov-Smirnov distance between the empirical CDF of the
// samples and `cdf`, evaluating both one-sided steps at every sample point.
double ks_distance(std::span<const double> samples, const std::function<double(double)>& cdf);

}  // namespace casq
