#pragma once

#include <cmath>
#include <cstdint>

namespace coverplan {

/// SplitMix64; used to seed streams and derive substreams.
struct SplitMix64 {
    uint64_t state;

    explicit SplitMix64(uint64_t seed) : state(seed) {}

    uint64_t next() {
        uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
};

/**
 * Replication substream derivation. Substream i of a run seeded with s is the
 * stream seeded with splitmix64(s + (i + 1) * golden_gamma), which keeps
 * parallel replications decorrelated and makes every replication reproducible
 * in isolation.
 */
inline uint64_t substream_seed(uint64_t seed, uint64_t index) {
    SplitMix64 sm(seed + (index + 1) * 0x9E3779B97F4A7C15ULL);
    return sm.next();
}

/// xoshiro256++ (Blackman and Vigna). State seeded through SplitMix64.
class Xoshiro256pp {
public:
    explicit Xoshiro256pp(uint64_t seed) {
        SplitMix64 sm(seed);
        for (auto& w : s_) w = sm.next();
    }

    uint64_t next() {
        const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return double(next() >> 11) * 0x1.0p-53; }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t s_[4];
};

namespace detail {

/// CDF inversion by sequential search; intended for n * min(p, 1-p) < 30.
inline long long binomial_inversion(Xoshiro256pp& rng, long long n, double p) {
    double u = rng.uniform();
    double pmf = std::pow(1.0 - p, double(n));
    long long k = 0;
    const double odds = p / (1.0 - p);
    while (u > pmf && k < n) {
        u -= pmf;
        pmf *= double(n - k) / double(k + 1) * odds;
        ++k;
    }
    return k;
}

/// Transformed-rejection sampler (BTRS, Hoermann 1993) for p <= 0.5 and
/// n * p >= 10. Exact: acceptance tests against the true pmf ratio.
inline long long binomial_btrs(Xoshiro256pp& rng, long long n, double p) {
    const double spq = std::sqrt(double(n) * p * (1.0 - p));
    const double b = 1.15 + 2.53 * spq;
    const double a = -0.0873 + 0.0248 * b + 0.01 * p;
    const double c = double(n) * p + 0.5;
    const double vr = 0.92 - 4.2 / b;
    const double alpha = (2.83 + 5.1 / b) * spq;
    const double lpq = std::log(p / (1.0 - p));
    const long long mode = static_cast<long long>(std::floor(double(n + 1) * p));
    const double h_mode =
        std::lgamma(double(mode) + 1.0) + std::lgamma(double(n - mode) + 1.0);
    for (;;) {
        double u = rng.uniform() - 0.5;
        double v = rng.uniform();
        double us = 0.5 - std::fabs(u);
        long long k = static_cast<long long>(std::floor((2.0 * a / us + b) * u + c));
        if (us >= 0.07 && v <= vr) return k;
        if (k < 0 || k > n) continue;
        v = std::log(v * alpha / (a / (us * us) + b));
        double bound = h_mode - std::lgamma(double(k) + 1.0) -
                       std::lgamma(double(n - k) + 1.0) + double(k - mode) * lpq;
        if (v <= bound) return k;
    }
}

}  // namespace detail

/**
 * Draw from Binomial(n, p). Inversion is used when n * min(p, 1-p) < 30,
 * otherwise the BTRS rejection sampler; both are exact, so the switch only
 * affects how the stream is consumed, not the distribution.
 */
inline long long binomial_draw(Xoshiro256pp& rng, long long n, double p) {
    if (n <= 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;
    const bool flip = p > 0.5;
    const double q = flip ? 1.0 - p : p;
    long long k;
    if (double(n) * q < 30.0)
        k = detail::binomial_inversion(rng, n, q);
    else
        k = detail::binomial_btrs(rng, n, q);
    return flip ? n - k : k;
}

}  // namespace coverplan
