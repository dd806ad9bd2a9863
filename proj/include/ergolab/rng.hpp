#pragma once

#include <cmath>
#include <cstdint>

namespace ergolab {

// splitmix64 finalizer (Steele/Lea/Flood fast splittable generators,
// fixed-increment variant by Vigna).
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Deterministic pseudo-random stream with cheap keyed substream derivation.
// One base seed per experiment; the stream for replicate i is
// RngStream::substream(seed, i), so results do not depend on how replicates
// are scheduled across workers.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : state_(splitmix64_mix(seed)) {}

    static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t index) {
        return splitmix64_mix(splitmix64_mix(seed) ^ splitmix64_mix(0x6A09E667F3BCC909ULL + index));
    }

    static RngStream substream(std::uint64_t seed, std::uint64_t index) {
        return RngStream(derive_key(seed, index));
    }

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform on [0,1) with 53 random bits.
    double next_uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller. Draws exactly two uniforms per call and
    // keeps no spare, so the stream position is a fixed function of the call
    // count.
    double next_gaussian() {
        double u1 = next_uniform();
        const double u2 = next_uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        return r * std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    std::uint64_t state_;
};

}  // namespace ergolab
