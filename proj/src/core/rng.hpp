// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

namespace gkd {

/// Stage tags that separate the random streams of the different pipelines.
enum class StreamTag : std::uint64_t {
    Field = 0x6669656c64ULL,      // "field"
    Init = 0x696e6974ULL,         // "init"
    Validation = 0x76616c6964ULL, // "valid"
    Oracle = 0x6f7261636cULL,     // "oracl"
    Sampling = 0x73616d70ULL,     // "samp"
};

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t splitmix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30U)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27U)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31U);
}

/// Seed for stream (master, tag, index). Pure function of its arguments, so
/// any job can be reconstructed without knowing the scheduling order.
constexpr std::uint64_t derive_seed(std::uint64_t master, StreamTag tag,
                                    std::uint64_t index)
{
    auto h = splitmix64(master);
    h = splitmix64(h ^ static_cast<std::uint64_t>(tag));
    return splitmix64(h ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

/// Further derivation for nested indices (e.g. realization -> block).
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index)
{
    return splitmix64(splitmix64(parent) ^ splitmix64(index ^ 0xd1b54a32d192ed03ULL));
}

using Engine = std::mt19937_64;

inline double uniform01(Engine& eng)
{
    return std::uniform_real_distribution<double>(0.0, 1.0)(eng);
}

}  // namespace gkd
