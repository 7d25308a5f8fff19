#pragma once

#include <cstdint>
#include <cmath>

namespace rsq::rng {

// Counter-based generator: every draw is a pure function of (key, counter),
// so per-(trial, component) sub-streams are reproducible regardless of
// execution order.

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ splitmix64(b));
}

// Stateless stream identified by a 64-bit key.
class Stream {
public:
    explicit Stream(std::uint64_t key) : key_(key) {}

    // Derive an independent sub-stream.
    Stream fork(std::uint64_t salt) const { return Stream(mix(key_, salt)); }
    Stream fork(std::uint64_t a, std::uint64_t b) const {
        return Stream(mix(mix(key_, a), b));
    }

    std::uint64_t bits(std::uint64_t counter) const {
        return splitmix64(key_ ^ splitmix64(counter + 0x632be59bd9b4e019ULL));
    }

    // Uniform in (0, 1]; never returns 0 so log() below is safe.
    double uniform(std::uint64_t counter) const {
        return (static_cast<double>(bits(counter) >> 11) + 1.0) * 0x1.0p-53;
    }

    // Box-Muller, one draw per counter (the sine twin is discarded).
    double normal(std::uint64_t counter, double mean, double stddev) const {
        const double u1 = uniform(2 * counter);
        const double u2 = uniform(2 * counter + 1);
        const double r = std::sqrt(-2.0 * std::log(u1));
        return mean + stddev * r * std::cos(6.283185307179586476925287 * u2);
    }

    std::uint64_t key() const { return key_; }

private:
    std::uint64_t key_;
};

} // namespace rsq::rng
