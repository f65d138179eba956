#pragma once

#include <cmath>
#include <cstdint>

// Self-contained random number machinery so that simulation output is
// byte-stable across platforms and standard-library versions.

namespace homsim {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// xoshiro256** (Blackman & Vigna), seeded through splitmix64.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
    }

    // Derived generator for an independent substream (per scan point).
    static Rng substream(std::uint64_t seed, std::uint64_t index) {
        std::uint64_t sm = seed ^ (0xA0761D6478BD642FULL * (index + 1));
        return Rng(splitmix64(sm));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1).
    double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t state_[4] = {};
};

namespace detail {

// Sequential-search inversion; cost O(mean), used for small means.
inline long poisson_inversion(Rng& rng, double mean) {
    const double target = rng.next_double();
    double p = std::exp(-mean);
    double cdf = p;
    long k = 0;
    while (cdf < target && k < 10000) {
        ++k;
        p *= mean / k;
        cdf += p;
    }
    return k;
}

// Hoermann's PTRS transformed-rejection sampler, valid for mean >= 10.
inline long poisson_ptrs(Rng& rng, double mean) {
    const double log_mean = std::log(mean);
    const double b = 0.931 + 2.53 * std::sqrt(mean);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);

    for (;;) {
        const double u = rng.next_double() - 0.5;
        const double v = rng.next_double();
        const double us = 0.5 - std::abs(u);
        const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= v_r) return static_cast<long>(kf);
        if (kf < 0 || (us < 0.013 && v > us)) continue;
        const double k = kf;
        if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
            k * log_mean - mean - std::lgamma(k + 1.0)) {
            return static_cast<long>(kf);
        }
    }
}

}  // namespace detail

inline long poisson_sample(Rng& rng, double mean) {
    if (mean <= 0.0) return 0;
    if (mean < 10.0) return detail::poisson_inversion(rng, mean);
    return detail::poisson_ptrs(rng, mean);
}

}  // namespace homsim
