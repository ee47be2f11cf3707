#pragma once

#include <cstdint>
#include <random>

namespace blindcal {

// Finalizer with full avalanche, used to split one master seed into
// independent streams. Deriving with the same tags always yields the same
// stream seed, so any trial or snapshot can be regenerated in isolation.
std::uint64_t mix64(std::uint64_t z);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b);

// Deterministic random source. Every draw consumes a fixed number of engine
// words (gaussian: 2, uniform: 1), so results do not depend on call history
// and are bit-identical across platforms for a given seed.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  // standard normal via Box-Muller, no cached second value
  double gaussian();

  // uniform in [0, 1)
  double uniform();

  // uniform in [-half_width, half_width]
  double uniform_symmetric(double half_width);

  // uniform integer in [0, bound), rejection sampled (no modulo bias)
  std::uint64_t uniform_below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
};

}  // namespace blindcal
