#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <utility>

#include "llrelax/constants.hpp"

namespace llrelax {

/// Philox4x32-10 counter-based generator. A draw is a pure
/// function of (key, counter), so any stream position is reachable without state.
class Philox4x32 {
  public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    explicit Philox4x32(std::uint64_t seed)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}
    explicit Philox4x32(Key key) : key_(key) {}

    Counter operator()(Counter ctr) const {
        Key key = key_;
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += 0x9E3779B9u;
                key[1] += 0xBB67AE85u;
            }
            const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
        }
        return ctr;
    }

  private:
    Key key_;
};

/// Uniform in (0, 1] from 53 high bits.
inline double unit_uniform(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = ((std::uint64_t{hi} << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
}

/// Two independent standard normals (Box-Muller) from one Philox block.
inline std::pair<double, double> normal_pair(const Philox4x32::Counter& block) {
    const double u1 = unit_uniform(block[0], block[1]);
    const double u2 = unit_uniform(block[2], block[3]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    return {r * std::cos(2.0 * pi * u2), r * std::sin(2.0 * pi * u2)};
}

}  // namespace llrelax
