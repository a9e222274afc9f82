#include <doctest.h>

#include <cmath>
#include <cstdint>

#include "mzsg/rng.hpp"

using namespace mzsg;

// Published known-answer vectors for Philox-4x32-10.
TEST_CASE("philox known-answer vectors") {
    {
        const auto r = philox::block(0, {0, 0, 0, 0});
        CHECK(r[0] == 0x6627e8d5u);
        CHECK(r[1] == 0xe169c58du);
        CHECK(r[2] == 0xbc57ac4cu);
        CHECK(r[3] == 0x9b00dbd8u);
    }
    {
        const std::uint64_t key = 0xffffffffffffffffull;
        const auto r = philox::block(key, {0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu});
        CHECK(r[0] == 0x408f276du);
        CHECK(r[1] == 0x41c83b0eu);
        CHECK(r[2] == 0xa20bc7c6u);
        CHECK(r[3] == 0x6d5451fdu);
    }
    {
        const std::uint64_t key = (std::uint64_t(0x299f31d0u) << 32) | 0xa4093822u;
        const auto r = philox::block(key, {0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u});
        CHECK(r[0] == 0xd16cfe09u);
        CHECK(r[1] == 0x94fdccebu);
        CHECK(r[2] == 0x5001e420u);
        CHECK(r[3] == 0x24126ea1u);
    }
}

TEST_CASE("uniforms live in the unit interval and are deterministic") {
    for (std::uint32_t i = 0; i < 1000; ++i) {
        double u0, u1;
        uniform_pair(42, RngStream::Misc, i, 7, 0, u0, u1);
        CHECK(u0 > 0.0);
        CHECK(u0 <= 1.0);
        CHECK(u1 >= 0.0);
        CHECK(u1 < 1.0);
        double v0, v1;
        uniform_pair(42, RngStream::Misc, i, 7, 0, v0, v1);
        CHECK(u0 == v0);
        CHECK(u1 == v1);
    }
}

TEST_CASE("normal stream moments") {
    const int n = 200000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; i += 2) {
        double z0, z1;
        normal_pair(7, RngStream::Misc, static_cast<std::uint32_t>(i), 0, 0, z0, z1);
        sum += z0 + z1;
        sum_sq += z0 * z0 + z1 * z1;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    CHECK(std::fabs(mean) < 5.0 / std::sqrt(static_cast<double>(n)));
    CHECK(std::fabs(var - 1.0) < 5.0 * std::sqrt(2.0 / n));
}

TEST_CASE("streams do not collide") {
    double a0, a1, b0, b1;
    uniform_pair(1, RngStream::Increments, 3, 4, 5, a0, a1);
    uniform_pair(1, RngStream::ValidationProbes, 3, 4, 5, b0, b1);
    CHECK(a0 != b0);
}
