#pragma once

#include <cstdint>

namespace glhnn {

// SplitMix64 (Steele, Lea & Flood 2014), written out so that corpora and
// dropout masks can be reproduced in any language:
//
//   state += 0x9E3779B97F4A7C15
//   z = state
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   return z ^ (z >> 31)
//
// All arithmetic is mod 2^64. uniform() uses the top 53 bits of a draw,
// uniform_int() rejects draws from the biased tail, so every derived quantity
// is a pure function of the seed.
//
// Instances are single-threaded; give each worker its own stream via derive().
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) noexcept : state_(seed) {}

    std::uint64_t next_u64() noexcept;

    // Uniform double in [0, 1).
    double uniform() noexcept;
    // Uniform double in [lo, hi).
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
    // Uniform integer in [0, n); n must be positive.
    std::uint64_t uniform_int(std::uint64_t n) noexcept;
    // Uniform integer in [lo, hi] inclusive.
    std::int64_t uniform_range(std::int64_t lo, std::int64_t hi) noexcept;
    // True with probability p.
    bool bernoulli(double p) noexcept { return uniform() < p; }

    std::uint64_t state() const noexcept { return state_; }

    // Seed for an independent sub-stream: one SplitMix64 output of
    // (root ^ mix(index)). Used for per-fold / per-repeat / per-worker streams.
    static std::uint64_t derive(std::uint64_t root, std::uint64_t index) noexcept;

private:
    std::uint64_t state_;
};

}  // namespace glhnn
