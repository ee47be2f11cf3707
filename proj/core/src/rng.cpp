#include "blindcal/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace blindcal {

std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t h = mix64(seed + 0x9E3779B97F4A7C15ULL);
  return mix64(h ^ (tag + 0x632BE59BD9B4E019ULL));
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return derive_seed(derive_seed(seed, a), b);
}

double RandomStream::gaussian() {
  /* u1 in (0,1] keeps the log finite, u2 in [0,1) */
  const double u1 = ((engine_() >> 11) + 1) * 0x1.0p-53;
  const double u2 = (engine_() >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

double RandomStream::uniform() { return (engine_() >> 11) * 0x1.0p-53; }

double RandomStream::uniform_symmetric(double half_width) {
  return half_width * (2.0 * uniform() - 1.0);
}

std::uint64_t RandomStream::uniform_below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("uniform_below: bound must be positive");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  for (;;) {
    const std::uint64_t w = engine_();
    if (w < limit) return w % bound;
  }
}

}  // namespace blindcal
