#include "noisycw/rng.hpp"

#include <cmath>

namespace noisycw {

namespace {

constexpr std::uint32_t kMult0 = 0xD2511F53u;
constexpr std::uint32_t kMult1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void philox_round(std::array<std::uint32_t, 4>& c, std::uint32_t k0,
                         std::uint32_t k1) {
    const std::uint64_t p0 = std::uint64_t(kMult0) * c[0];
    const std::uint64_t p1 = std::uint64_t(kMult1) * c[2];
    const std::uint32_t hi0 = std::uint32_t(p0 >> 32), lo0 = std::uint32_t(p0);
    const std::uint32_t hi1 = std::uint32_t(p1 >> 32), lo1 = std::uint32_t(p1);
    c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
}

inline double to_unit_interval(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t x = (std::uint64_t(hi) << 32) | lo;
    // (0, 1]; never returns 0 so log() below is safe
    return double((x >> 11) + 1) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::uint64_t seed, std::uint64_t stream,
                                        std::uint64_t step, std::uint32_t slot) {
    std::array<std::uint32_t, 4> c = {
        std::uint32_t(step), std::uint32_t(step >> 32),
        std::uint32_t(stream), std::uint32_t(stream >> 32) ^ slot};
    std::uint32_t k0 = std::uint32_t(seed);
    std::uint32_t k1 = std::uint32_t(seed >> 32);
    for (int r = 0; r < 10; ++r) {
        philox_round(c, k0, k1);
        k0 += kWeyl0;
        k1 += kWeyl1;
    }
    return c;
}

NormalPair normal_pair(std::uint64_t seed, std::uint64_t stream, std::uint64_t step,
                       std::uint32_t slot) {
    const auto b = philox4x32(seed, stream, step, slot);
    const double u1 = to_unit_interval(b[0], b[1]);
    const double u2 = to_unit_interval(b[2], b[3]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * M_PI * u2;
    return {r * std::cos(phi), r * std::sin(phi)};
}

double uniform_draw(std::uint64_t seed, std::uint64_t stream, std::uint64_t step,
                    std::uint32_t slot) {
    const auto b = philox4x32(seed, stream, step, slot);
    return to_unit_interval(b[0], b[1]);
}

}  // namespace noisycw
