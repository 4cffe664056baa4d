// Copyright (c) 2026 The cba developers
// Distributed under the MIT software license, see the accompanying
// file LICENSE or http://www.opensource.org/licenses/mit-license.php.

#pragma once

#include <cstdint>
#include <random>

namespace cba {

// splitmix64 finalizer (Steele/Lea/Vigna). Used only to derive seeds.
inline std::uint64_t splitmix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Counter-based seed derivation: stream member k of a master seed is
// splitmix64(seed + (k+1)*golden). Any derived stream (a single trial, say)
// can be reconstructed in isolation without generating its predecessors.
inline std::uint64_t split_seed(std::uint64_t seed, std::uint64_t index) {
    constexpr std::uint64_t golden = 0x9e3779b97f4a7c15ULL;
    return splitmix64(seed + (index + 1) * golden);
}

// Deterministic random stream. Only raw mt19937_64 output is consumed (the
// engine is fully specified by the standard, so draws are bit-exact across
// platforms; std::uniform_int_distribution and friends are not and must not
// be used here). Fair bits are buffered 64 at a time.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t u64() { return engine_(); }

    /// One fair bit (0 or 1).
    int bit() {
        if (left_ == 0) {
            buf_ = engine_();
            left_ = 64;
        }
        int b = static_cast<int>(buf_ & 1u);
        buf_ >>= 1;
        --left_;
        return b;
    }

    /// Uniform integer in [0, bound), bound ≥ 1, by masked rejection.
    std::uint64_t below(std::uint64_t bound) {
        if (bound <= 1) return 0;
        std::uint64_t mask = ~0ULL >> __builtin_clzll((bound - 1) | 1);
        for (;;) {
            std::uint64_t v = engine_() & mask;
            if (v < bound) return v;
        }
    }

private:
    std::mt19937_64 engine_;
    std::uint64_t buf_ = 0;
    int left_ = 0;
};

} // namespace cba
