/**
 * @file rng.hpp
 * @brief Deterministic random streams.
 *
 * Every batch operation derives one independent stream per output slot from
 * (seed, slot). Results therefore do not depend on scheduling order or
 * thread count, and are reproducible across platforms: no standard-library
 * distributions are used anywhere (their mappings are implementation
 * defined).
 */
#pragma once

#include <cstdint>

namespace cephforge {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    /// Uniform integer in [0, n), unbiased (rejection of the tail range).
    std::uint64_t next_below(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % n;
    }

    /// Uniform integer in [lo, hi], inclusive.
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(next_below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

private:
    std::uint64_t state_;
};

/// Derives the per-slot stream seed. Mixing through splitmix64 decorrelates
/// adjacent slots even for adjacent user seeds.
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t slot) {
    std::uint64_t s = seed;
    std::uint64_t a = splitmix64(s);
    s = a ^ (slot * 0xd1342543de82ef95ull + 0x2545f4914f6cdd1dull);
    return splitmix64(s);
}

inline Rng slot_rng(std::uint64_t seed, std::uint64_t slot) {
    return Rng(derive_stream(seed, slot));
}

}  // namespace cephforge
