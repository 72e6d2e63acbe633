#pragma once

#include <cstdint>
#include <random>

namespace coars {

// Uniform double in [0, 1) built directly from the top 53 bits, so draws are
// identical across standard library implementations (std::uniform_real_
// distribution is not portable).
inline double canonical_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Draw from [0, n).
inline int uniform_index(std::mt19937_64& rng, int n) {
    int i = static_cast<int>(canonical_unit(rng) * n);
    return i >= n ? n - 1 : i;
}

// splitmix64-style combiner for derived stream seeds; results do not depend
// on evaluation order, which keeps parallel collection deterministic.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

}  // namespace coars
