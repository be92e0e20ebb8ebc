#include "ci/random.hpp"

#include <stdexcept>

namespace ci {

std::uint64_t RandomBits::below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("below(0)");
    if (n == 1) return 0;
    int bits = 0;
    while ((std::uint64_t{1} << bits) < n) ++bits;
    for (;;) {
        std::uint64_t v = 0;
        for (int i = 0; i < bits; ++i) v = (v << 1) | (bit() ? 1 : 0);
        if (v < n) return v;
    }
}

RandomBits RandomBits::derive(std::uint64_t index) const {
    // splitmix-style mixing of (seed, index)
    std::uint64_t z = seed_ + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return RandomBits(z ^ (z >> 31), true);
}

std::size_t pick_weighted(std::span<const Rat> weights, RandomBits& rng) {
    if (weights.empty()) throw std::invalid_argument("pick_weighted: no weights");
    std::vector<Rat> cum(weights.size());
    Rat acc = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        cum[i] = acc;
    }
    if (acc != 1) throw std::invalid_argument("pick_weighted: weights must sum to 1");

    // Dyadic interval [num/2^t, (num+1)/2^t) refined until it fits inside
    // one cumulative segment [cum[k-1], cum[k]).
    Int num = 0;
    Int pow = 1;
    for (;;) {
        Rat lo(num, pow);
        Rat hi(num + 1, pow);
        std::size_t k = 0;
        while (k < cum.size() && cum[k] <= lo) ++k;
        if (k == cum.size()) k = cum.size() - 1;  // cannot happen with exact sums
        if (hi <= cum[k]) return k;
        num <<= 1;
        pow <<= 1;
        if (rng.bit()) ++num;
    }
}

Int uniform_below(const Int& n, RandomBits& rng) {
    if (n <= 0) throw std::invalid_argument("uniform_below: n <= 0");
    if (n == 1) return 0;
    std::size_t bits = 0;
    while ((Int(1) << bits) < n) ++bits;
    for (;;) {
        Int v = 0;
        for (std::size_t i = 0; i < bits; ++i) {
            v <<= 1;
            if (rng.bit()) ++v;
        }
        if (v < n) return v;
    }
}

}  // namespace ci
