#pragma once

#include <cstdint>
#include <random>

#include "edlab/domain.hpp"

namespace edlab {

/// Uniform double in [0, 1) from the top 53 bits of one engine draw.
/// Used instead of std::uniform_real_distribution, whose output sequence
/// is implementation-defined; this mapping gives the same stream on every
/// platform for the same seed.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform point of the domain (its natural volume measure).
inline PhasePoint uniform_point(Domain d, std::mt19937_64& rng) {
  if (d == Domain::circle) {
    const double u = uniform01(rng);
    return circle_point(-std::numbers::pi + 2.0 * std::numbers::pi * u);
  }
  const double x = uniform01(rng);
  const double y = uniform01(rng);
  return square_point(x, y);
}

}  // namespace edlab
