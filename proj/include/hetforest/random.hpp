#pragma once

#include <cstdint>
#include <vector>

namespace hetforest {

/// Counter-based 64-bit generator (SplitMix64, Steele/Lea/Flood 2014).
///
/// The state advances by the fixed increment 0x9E3779B97F4A7C15 on every
/// draw and the output is a bijective finalizer of the state, so the
/// sequence for a given seed is identical on every platform and compiler.
/// All randomness in the library flows through this type from explicit
/// seeds.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Unbiased draw in [0, bound) via bitmask rejection. bound must be > 0.
    std::uint64_t next_below(std::uint64_t bound) {
        if (bound <= 1) return 0;
        std::uint64_t mask = bound - 1;
        mask |= mask >> 1;
        mask |= mask >> 2;
        mask |= mask >> 4;
        mask |= mask >> 8;
        mask |= mask >> 16;
        mask |= mask >> 32;
        std::uint64_t v;
        do {
            v = next() & mask;
        } while (v >= bound);
        return v;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_unit() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    bool next_bool() { return (next() >> 63) != 0; }

private:
    std::uint64_t state_;
};

/// Derives an independent stream seed from (seed, stream) with the
/// SplitMix64 finalizer; used for per-tree and per-node sub-seeds.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + (stream + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// In-place Fisher-Yates shuffle driven by SplitMix64.
template <typename T>
void shuffle(std::vector<T>& items, SplitMix64& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.next_below(i));
        std::swap(items[i - 1], items[j]);
    }
}

/// Draws k distinct values from {0, ..., n-1}, returned in ascending order.
std::vector<int> sample_without_replacement(int n, int k, SplitMix64& rng);

}  // namespace hetforest
