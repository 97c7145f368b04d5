#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace sbayes {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to decorrelate derived stream seeds.
constexpr std::uint64_t mix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Independent stream for replicate `index` of a run seeded with `seed`.
// Depends only on (seed, index), never on scheduling.
inline Rng derive_stream(std::uint64_t seed, std::uint64_t index)
{
    return Rng{mix64(mix64(seed) ^ mix64(index + 0x5851f42d4c957f2dULL))};
}

inline double standard_normal(Rng& rng)
{
    std::normal_distribution<double> dist;
    return dist(rng);
}

inline double uniform01(Rng& rng)
{
    return std::uniform_real_distribution<double>{0.0, 1.0}(rng);
}

// Uniformly random size-k subset of {0..n-1} (Floyd's algorithm), sorted.
std::vector<std::size_t> random_subset(std::size_t n, std::size_t k, Rng& rng);

}  // namespace sbayes
