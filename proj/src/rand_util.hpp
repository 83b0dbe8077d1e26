#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace qbranch::detail {

// Fixed u64 -> [0,1) mapping so draws do not depend on the standard library's
// distribution implementations.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Box-Muller; same rationale as unit_uniform.
inline double standard_normal(std::mt19937_64& rng) {
  double u1 = unit_uniform(rng);
  while (u1 == 0.0) u1 = unit_uniform(rng);
  const double u2 = unit_uniform(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace qbranch::detail
