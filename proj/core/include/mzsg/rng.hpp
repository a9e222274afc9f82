#ifndef MZSG_RNG_HPP
#define MZSG_RNG_HPP

#include <array>
#include <cmath>
#include <cstdint>

namespace mzsg {

/// Philox-4x32-10 counter-based generator. Every draw is a pure function of
/// (key, counter), so simulation output is independent of scheduling and
/// worker count. Verified against the published known-answer vectors.
namespace philox {

inline std::array<std::uint32_t, 4> block(std::uint64_t key, std::array<std::uint32_t, 4> ctr) {
    std::uint32_t k0 = static_cast<std::uint32_t>(key);
    std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = std::uint64_t(0xD2511F53u) * ctr[0];
        const std::uint64_t p1 = std::uint64_t(0xCD9E8D57u) * ctr[2];
        const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
        const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ k0, lo1, hi0 ^ ctr[3] ^ k1, lo0};
        k0 += 0x9E3779B9u;
        k1 += 0xBB67AE85u;
    }
    return ctr;
}

} // namespace philox

/// Stream tags keep independent uses of the same seed from colliding.
enum class RngStream : std::uint32_t {
    Increments = 0,
    ValidationProbes = 1,
    IsaacsSamples = 2,
    Misc = 3,
};

/// Two uniforms in (0,1] x [0,1) from one Philox block.
inline void uniform_pair(std::uint64_t seed, RngStream stream, std::uint32_t id0,
                         std::uint32_t id1, std::uint32_t block_index, double& u0, double& u1) {
    const auto w = philox::block(
        seed, {id0, id1, block_index, static_cast<std::uint32_t>(stream)});
    const std::uint64_t a = (std::uint64_t(w[0]) << 32) | w[1];
    const std::uint64_t b = (std::uint64_t(w[2]) << 32) | w[3];
    u0 = (static_cast<double>(a >> 11) + 1.0) * 0x1.0p-53; // (0,1]
    u1 = static_cast<double>(b >> 11) * 0x1.0p-53;          // [0,1)
}

/// Two standard normals via Box-Muller.
inline void normal_pair(std::uint64_t seed, RngStream stream, std::uint32_t id0,
                        std::uint32_t id1, std::uint32_t block_index, double& z0, double& z1) {
    double u0, u1;
    uniform_pair(seed, stream, id0, id1, block_index, u0, u1);
    const double r = std::sqrt(-2.0 * std::log(u0));
    const double a = 6.283185307179586476925286766559 * u1;
    z0 = r * std::cos(a);
    z1 = r * std::sin(a);
}

/// Fills out[0..n) with standard normals keyed on (seed, id0, id1).
inline void normal_fill(std::uint64_t seed, RngStream stream, std::uint32_t id0,
                        std::uint32_t id1, double* out, int n) {
    for (int k = 0; k < n; k += 2) {
        double z0, z1;
        normal_pair(seed, stream, id0, id1, static_cast<std::uint32_t>(k / 2), z0, z1);
        out[k] = z0;
        if (k + 1 < n) out[k + 1] = z1;
    }
}

inline double uniform_at(std::uint64_t seed, RngStream stream, std::uint32_t id0,
                         std::uint32_t id1, std::uint32_t block_index) {
    double u0, u1;
    uniform_pair(seed, stream, id0, id1, block_index, u0, u1);
    return u1;
}

} // namespace mzsg

#endif // MZSG_RNG_HPP
