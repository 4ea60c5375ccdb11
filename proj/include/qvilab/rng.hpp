#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace qvilab {

/// SplitMix64 finalizer. Used to derive independent seeds from (seed, counter).
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Counter-based stream derivation: stream_seed(seed, i) for i = 0, 1, ... are
/// statistically independent seeds for the same master seed.
constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

/// Platform-independent random stream. The standard distributions are
/// implementation-defined, so uniform reals and integers are derived by hand
/// from the raw mt19937_64 output to keep runs bit-reproducible.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform in (lo, hi).
    double uniform(double lo, double hi) {
        double u;
        do {
            u = uniform();
        } while (u == 0.0);
        return lo + (hi - lo) * u;
    }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Standard exponential variate, used for Dirichlet(1) rows.
    double exponential() {
        double u;
        do {
            u = uniform();
        } while (u == 0.0);
        return -std::log(u);
    }

    /// Child stream; does not disturb this stream's state beyond one draw.
    Rng split() { return Rng(splitmix64(engine_())); }

private:
    std::mt19937_64 engine_;
};

}  // namespace qvilab
