#pragma once

#include <numbers>

namespace llrelax {

// CODATA 2018 exact / recommended values, SI.
inline constexpr double hbar = 1.054571817e-34;
inline constexpr double boltzmann = 1.380649e-23;
inline constexpr double pi = std::numbers::pi;

namespace units {

inline constexpr double micrometer = 1e-6;
inline constexpr double nanometer = 1e-9;
inline constexpr double millisecond = 1e-3;
inline constexpr double mm_per_s = 1e-3;
inline constexpr double nanokelvin = 1e-9;
inline constexpr double per_micrometer = 1e6;

/// Trap frequencies are quoted as nu = omega / 2pi.
constexpr double angular(double hertz) { return 2.0 * pi * hertz; }
constexpr double hertz(double angular_frequency) { return angular_frequency / (2.0 * pi); }

}  // namespace units
}  // namespace llrelax
