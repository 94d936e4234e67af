#pragma once

#include <array>
#include <cstdint>

namespace noisycw {

// Philox4x32-10 counter-based generator.  A draw is addressed by
// (seed, stream, step, slot) so ensembles can be sampled in any order,
// on any number of threads, with identical results.
std::array<std::uint32_t, 4> philox4x32(std::uint64_t seed, std::uint64_t stream,
                                        std::uint64_t step, std::uint32_t slot);

// Two independent standard normals per call (Box-Muller on one Philox block).
struct NormalPair {
    double z0;
    double z1;
};
NormalPair normal_pair(std::uint64_t seed, std::uint64_t stream, std::uint64_t step,
                       std::uint32_t slot = 0);

// Uniform in (0,1], 53-bit resolution, from the first half of a Philox block.
double uniform_draw(std::uint64_t seed, std::uint64_t stream, std::uint64_t step,
                    std::uint32_t slot = 0);

}  // namespace noisycw
