#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace rbpimd {

using Rng = std::mt19937_64;

/// Independent stream purposes within one trajectory. Noise and batch
/// divisions never share an engine, so switching the force strategy does not
/// perturb the Langevin noise sequence.
enum class Stream : std::uint64_t {
    Init = 1,
    Noise = 2,
    Batch = 3,
    Metropolis = 4,
    Weight = 5,
};

/// Seeds an engine from (master seed, trajectory id, stream purpose).
inline Rng make_rng(std::uint64_t seed, std::uint64_t trajectory, Stream stream) {
    const auto s = static_cast<std::uint64_t>(stream);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(trajectory),
                      static_cast<std::uint32_t>(trajectory >> 32), static_cast<std::uint32_t>(s),
                      0x9e3779b9u};
    return Rng(seq);
}

inline void fill_standard_normal(Rng& rng, std::span<double> out) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (double& x : out) x = gauss(rng);
}

inline double uniform01(Rng& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace rbpimd
