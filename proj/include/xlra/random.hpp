#pragma once

#include <cstdint>
#include <random>

namespace xlra {

using RandomStream = std::mt19937_64;

/// Independent sub-streams of one Monte Carlo trial.
enum class StreamId : std::uint64_t
{
    Geometry = 0,   // user placement and per-antenna shadowing
    Visibility = 1, // Bernoulli visibility map
    Access = 2,     // attempt and pilot draws
    Estimator = 3,  // noise of the gain estimate
};

inline std::uint64_t
splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for stream `id` of trial `trial` under `master`. Depends only on the triple,
/// never on scheduling, so results do not change with the worker count.
inline std::uint64_t
derive_seed(std::uint64_t master, std::uint64_t trial, StreamId id)
{
    std::uint64_t h = splitmix64(master);
    h = splitmix64(h ^ trial);
    h = splitmix64(h ^ static_cast<std::uint64_t>(id));
    return h;
}

inline RandomStream
make_stream(std::uint64_t master, std::uint64_t trial, StreamId id)
{
    return RandomStream(derive_seed(master, trial, id));
}

} // namespace xlra
