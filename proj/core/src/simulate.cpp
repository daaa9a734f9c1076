#include "casq/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace casq {

namespace {

void require_sheet(const BalanceSheet& b, const char* field) {
    if (!(std::isfinite(b.assets) && std::isfinite(b.liabilities) && b.liabilities > 0.0 &&
          b.liabilities < b.assets))
        throw std::domain_error(std::string(field) + ": must satisfy 0 < liabilities < assets");
}

// Cascade over the sorted solvency ratios r_i = A_{i,1} / L_i.  A node is in
// default once r_i <= exp(a * q), and q only grows, so a single pass over the
// sorted ratios covers every wave.
TrialResult cascade_from_ratios(std::vector<double>& ratios, double a) {
    std::sort(ratios.begin(), ratios.end());
    const std::size_t n = ratios.size();

    TrialResult result;
    std::size_t defaulted = 0;
    while (defaulted < n && ratios[defaulted] <= 1.0) ++defaulted;
    result.wave_losses.push_back(static_cast<double>(defaulted) / static_cast<double>(n));

    while (defaulted < n) {
        const double threshold = std::exp(a * result.wave_losses.back());
        std::size_t next = defaulted;
        while (next < n && ratios[next] <= threshold) ++next;
        if (next == defaulted) break;  // no new defaults: the cascade is exhausted
        defaulted = next;
        result.wave_losses.push_back(static_cast<double>(defaulted) / static_cast<double>(n));
    }
    result.waves = static_cast<int>(result.wave_losses.size());
    result.q_final = result.wave_losses.back();
    return result;
}

EnsembleSummary summarize(std::vector<Probability> samples) {
    EnsembleSummary s;
    const std::size_t m = samples.size();
    double sum = 0.0;
    for (double v : samples) sum += v;
    s.mean = sum / static_cast<double>(m);
    double ss = 0.0;
    for (double v : samples) ss += (v - s.mean) * (v - s.mean);
    s.variance = m > 1 ? ss / static_cast<double>(m - 1) : 0.0;

    std::sort(samples.begin(), samples.end());
    auto quantile = [&](double p) {
        const auto idx = static_cast<std::size_t>(std::llround(p * static_cast<double>(m - 1)));
        return samples[idx];
    };
    s.q05 = quantile(0.05);
    s.q25 = quantile(0.25);
    s.q50 = quantile(0.50);
    s.q75 = quantile(0.75);
    s.q95 = quantile(0.95);
    return s;
}

}  // namespace

BalanceSheet balance_for_q(Probability q, double mu, double sigma) {
    if (!(q > 0.0 && q < 1.0)) throw std::domain_error("q: must lie in (0, 1)");
    if (!(std::isfinite(sigma) && sigma > 0.0))
        throw std::domain_error("sigma: must be finite and > 0 to calibrate from q");
    if (!std::isfinite(mu)) throw std::domain_error("mu: must be finite");
    BalanceSheet b{1.0, std::exp(mu + sigma * std_normal_quantile(q))};
    require_sheet(b, "balance calibrated from q");
    return b;
}

void NetworkConfig::validate() const {
    if (n < 1) throw std::domain_error("n: must be >= 1");
    if (trials < 1) throw std::domain_error("trials: must be >= 1");
    if (!std::isfinite(mu)) throw std::domain_error("mu: must be finite");
    if (!(std::isfinite(sigma) && sigma >= 0.0))
        throw std::domain_error("sigma: must be finite and >= 0");
    if (!(rho >= 0.0 && rho < 1.0)) throw std::domain_error("rho: must lie in [0, 1)");
    if (!(std::isfinite(a) && a >= 0.0)) throw std::domain_error("a: must be finite and >= 0");
    if (fixed_z && !std::isfinite(*fixed_z)) throw std::domain_error("z: must be finite");
    if (per_node.empty()) {
        require_sheet(balance, "balance");
    } else {
        if (per_node.size() != n)
            throw std::domain_error("per_node: must have exactly n balance sheets");
        for (const auto& sheet : per_node) require_sheet(sheet, "per_node");
    }
}

ShockSample sample_shocks(const NetworkConfig& config, TrialRng& rng) {
    config.validate();
    ShockSample sample;
    sample.z = config.fixed_z ? *config.fixed_z : rng.normal();
    const double common = std::sqrt(config.rho) * sample.z;
    const double idio_scale = std::sqrt(1.0 - config.rho);

    sample.post_shock_assets.resize(config.n);
    for (std::size_t i = 0; i < config.n; ++i) {
        const double assets = config.per_node.empty() ? config.balance.assets
                                                      : config.per_node[i].assets;
        const double log_return =
            config.mu + config.sigma * (common + idio_scale * rng.normal());
        sample.post_shock_assets[i] = assets * std::exp(log_return);
    }
    return sample;
}

TrialResult run_cascade(std::span<const double> post_shock_assets,
                        std::span<const double> liabilities, double a) {
    if (post_shock_assets.empty() || post_shock_assets.size() != liabilities.size())
        throw std::domain_error("run_cascade: assets and liabilities must be nonempty and equal-sized");
    if (!(std::isfinite(a) && a >= 0.0)) throw std::domain_error("a: must be finite and >= 0");

    std::vector<double> ratios(post_shock_assets.size());
    for (std::size_t i = 0; i < ratios.size(); ++i)
        ratios[i] = post_shock_assets[i] / liabilities[i];
    return cascade_from_ratios(ratios, a);
}

TrialResult run_trial(const NetworkConfig& config, std::uint64_t trial_index) {
    TrialRng rng(config.master_seed, trial_index);
    ShockSample sample = sample_shocks(config, rng);

    std::vector<double> ratios(config.n);
    for (std::size_t i = 0; i < config.n; ++i) {
        const double liabilities = config.per_node.empty() ? config.balance.liabilities
                                                           : config.per_node[i].liabilities;
        ratios[i] = sample.post_shock_assets[i] / liabilities;
    }
    TrialResult result = cascade_from_ratios(ratios, config.a);
    result.z = sample.z;
    return result;
}

EnsembleResult run_ensemble(const NetworkConfig& config, unsigned threads) {
    config.validate();
    const std::size_t m = config.trials;

    EnsembleResult out;
    out.trials.resize(m);

    const unsigned worker_count = std::max(1u, threads);
    if (worker_count == 1 || m == 1) {
        for (std::size_t t = 0; t < m; ++t) {
            const TrialResult r = run_trial(config, t);
            out.trials[t] = {r.z, r.waves, r.q_final};
        }
    } else {
        std::vector<std::thread> workers;
        std::exception_ptr failure;
        std::mutex failure_mutex;
        const std::size_t block = (m + worker_count - 1) / worker_count;
        for (unsigned w = 0; w < worker_count; ++w) {
            const std::size_t begin = static_cast<std::size_t>(w) * block;
            const std::size_t end = std::min(m, begin + block);
            if (begin >= end) break;
            workers.emplace_back([&, begin, end] {
                try {
                    for (std::size_t t = begin; t < end; ++t) {
                        const TrialResult r = run_trial(config, t);
                        out.trials[t] = {r.z, r.waves, r.q_final};
                    }
                } catch (...) {
                    const std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            });
        }
        for (auto& worker : workers) worker.join();
        if (failure) std::rethrow_exception(failure);
    }

    out.samples.resize(m);
    for (std::size_t t = 0; t < m; ++t) out.samples[t] = out.trials[t].q_final;
    out.summary = summarize(out.samples);
    return out;
}

double ks_distance(std::span<const double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw std::domain_error("samples: must be nonempty");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double m = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double value = cdf(sorted[i]);
        d = std::max({d, value - static_cast<double>(i) / m,
                      static_cast<double>(i + 1) / m - value});
    }
    return d;
}

}  // namespace casq
