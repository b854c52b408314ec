#pragma once

#include <cstdint>
#include <random>

namespace shieldrl::rng {

using Engine = std::mt19937_64;

/// SplitMix64 finalizer; used to decorrelate seeds derived from small integers.
inline std::uint64_t split_mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Deterministic sub-stream seed for (seed, stream). Used wherever work is
/// fanned out (repetition harnesses, per-seed experiment batches).
inline std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    return split_mix(split_mix(seed) ^ split_mix(stream + 0x51'7c'c1'b7'27'22'0a'95ULL));
}

inline Engine make_engine(std::uint64_t seed) { return Engine{split_mix(seed)}; }

}  // namespace shieldrl::rng
