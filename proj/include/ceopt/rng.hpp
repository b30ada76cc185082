#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ceopt {

/// Seedable random stream used everywhere randomness is needed.
///
/// Same seed gives the same draw sequence on the same build. Derived
/// streams (`substream`) depend only on (seed, key), so independent
/// runs can be split deterministically without sharing state.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : seed_(seed), gen_(mix(seed)) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform draw in [0, 1).
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; the second value of each pair is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        // 1 - uniform() lies in (0, 1], keeping the log argument positive.
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    /// Independent stream derived from this stream's seed and a key.
    RngStream substream(std::uint64_t key) const {
        return RngStream(mix(seed_ ^ mix(key + 0x9e3779b97f4a7c15ULL)));
    }

private:
    static constexpr double pi = 3.14159265358979323846;

    // splitmix64 finalizer; spreads low-entropy seeds over the full state space.
    static std::uint64_t mix(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    std::uint64_t seed_;
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace ceopt
