#pragma once

#include <cstdint>

namespace riscrlb {

/// splitmix64 finalizer; deterministic stream splitting for per-cell and
/// per-iteration generators so results do not depend on evaluation order.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace riscrlb
