#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

// Stream derivation on top of the Philox kernels.  Every random draw in the
// toolkit is addressed by (seed, role, path, block, sub): the first three
// derive a 64-bit key, the last two form the counter.  Nothing is stateful,
// so any consumer can regenerate any draw in isolation and two runs that
// touch the same addresses in different orders still agree bit for bit.

namespace sigmar::rng {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : s) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

// Key for the (seed, role, path) stream.  Roles name what the draws are for
// ("B" driving noise, "M" excursion marks, ...) so adding a consumer never
// shifts the draws of an existing one.
constexpr std::uint64_t stream_key(std::uint64_t seed, std::string_view role,
                                   std::uint64_t path) {
    return splitmix64(splitmix64(seed ^ fnv1a64(role)) ^ path);
}

// Handle for one derived stream.  Gaussians come from consecutive blocks at
// sub = 0; single uniforms and signs address (block, sub) directly, which the
// excursion-flip code uses to key marks by (excursion index, piece index).
struct Substream {
    std::uint64_t key = 0;

    Substream() = default;
    Substream(std::uint64_t seed, std::string_view role, std::uint64_t path)
        : key(stream_key(seed, role, path)) {}

    // Fills out[0 .. count) with standard Gaussians starting at block0.  An
    // odd count still consumes a whole final block; the dropped second half
    // is regenerated, not remembered, if anyone asks for it again.
    void fill_gaussians(std::size_t count, double* out,
                        std::uint64_t block0 = 0) const;

    std::vector<double> gaussians(std::size_t count,
                                  std::uint64_t block0 = 0) const;

    double uniform(std::uint64_t block, std::uint64_t sub) const;

    // +1 with probability p, else -1.  Strict comparison, so p = 0 yields
    // all -1 and p = 1 all +1.
    int bernoulli_pm(std::uint64_t block, std::uint64_t sub, double p) const;
};

}  // namespace sigmar::rng
