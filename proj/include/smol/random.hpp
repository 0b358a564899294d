#pragma once

#include <cstdint>
#include <random>

namespace smol {

using Rng = std::mt19937_64;

/// Independent generator streams derived from one run seed. Each consumer of
/// randomness in a run owns exactly one stream, so adding draws in one place
/// never shifts the sequence seen by another.
enum class Stream : std::uint32_t {
    Centroids = 1,
    Init = 2,
    Variation = 3,
    Schedule = 4,
    Extinction = 5,
};

inline Rng make_rng(std::uint64_t seed, Stream stream)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream)};
    return Rng(seq);
}

} // namespace smol
