#pragma once

#include "ci/rational.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace ci {

/// Deterministic random source: a seeded mt19937_64 consumed one bit at a
/// time.  All sampling in the library goes through this class so that a
/// fixed seed yields byte-identical runs.
class RandomBits {
public:
    explicit RandomBits(std::uint64_t seed = 0) : eng_(seed) {}

    bool bit() {
        if (avail_ == 0) {
            buf_ = eng_();
            avail_ = 64;
        }
        bool b = buf_ & 1;
        buf_ >>= 1;
        --avail_;
        return b;
    }

    /// Uniform integer in [0, n) by rejection over the next power of two.
    std::uint64_t below(std::uint64_t n);

    /// Derives an independent stream (seed, index) for parallel workers.
    RandomBits derive(std::uint64_t index) const;

    std::uint64_t seed() const { return seed_; }

private:
    RandomBits(std::uint64_t seed, bool) : eng_(seed), seed_(seed) {}
    std::mt19937_64 eng_;
    std::uint64_t seed_ = 0;
    std::uint64_t buf_ = 0;
    int avail_ = 0;
};

/// Selects index k with probability weights[k] (weights must sum to 1).
/// Draws random bits to refine a dyadic interval until it lies inside a
/// single segment of the cumulative distribution, so the choice is exact:
/// no floating point and no rejection loop.
std::size_t pick_weighted(std::span<const Rat> weights, RandomBits& rng);

/// Uniform big integer in [0, n).
Int uniform_below(const Int& n, RandomBits& rng);

}  // namespace ci
