#pragma once

#include <cstdint>
#include <random>

#include "casq/normal.hpp"

namespace casq {

// splitmix64 step (Vigna); used to turn (master_seed, trial) into well-mixed
// engine seed material.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Independent per-trial random stream.  The engine state is a pure function
// of (master_seed, trial), so ensembles reproduce bit-identically no matter
// how trials are scheduled across threads.  Normal deviates come from the
// inverse-CDF transform, which is itself a deterministic pure function of
// the engine output.
class TrialRng {
  public:
    TrialRng(std::uint64_t master_seed, std::uint64_t trial) {
        std::uint64_t s = master_seed + (trial + 1) * 0x9E3779B97F4A7C15ull;
        const std::uint64_t w1 = splitmix64(s);
        const std::uint64_t w2 = splitmix64(s);
        std::seed_seq seq{static_cast<std::uint32_t>(w1), static_cast<std::uint32_t>(w1 >> 32),
                          static_cast<std::uint32_t>(w2), static_cast<std::uint32_t>(w2 >> 32)};
        engine_.seed(seq);
    }

    // Uniform on the open interval (0, 1), on the 2^53 grid of half-steps.
    double uniform() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() { return std_normal_quantile(uniform()); }

  private:
    std::mt19937_64 engine_;
};

}  // namespace casq
