#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace streamqoe {

// Counter-style stream derivation: path i of a run is seeded from
// (seed, stream) through a splitmix64 finalizer, so any path can be
// simulated in isolation and results do not depend on execution order.
inline std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ull;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebull;
    x ^= x >> 31;
    return x;
}

inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
    const std::uint64_t golden = 0x9e3779b97f4a7c15ull;
    return mix64(mix64(seed + golden) + golden * (stream + 1));
}

// One independent random stream. Draws go through explicit inverse-CDF
// transforms (no std::*_distribution) so sequences are identical across
// standard-library implementations.
class PathRng {
public:
    PathRng(std::uint64_t seed, std::uint64_t stream)
        : engine_(stream_seed(seed, stream)) {}

    std::uint64_t bits() { return engine_(); }

    // uniform on (0, 1]; never 0, so log(u) is safe
    double uniform() {
        return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
    }

    double exponential(double rate) { return -std::log(uniform()) / rate; }

    // uniform on [0, 2^bits); bit counts up to 32
    std::uint32_t uniform_bits(unsigned bits) {
        return static_cast<std::uint32_t>(engine_() >> (64 - bits));
    }

private:
    std::mt19937_64 engine_;
};

} // namespace streamqoe
