#pragma once

#include <cstdint>
#include <random>

namespace cluslasso {

// Seeded 64-bit Mersenne Twister. The engine output is fully specified by the
// standard, and normals come from the inverse CDF, so streams are identical
// across platforms and standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();
  // Standard normal via the inverse CDF.
  double normal();

 private:
  std::mt19937_64 engine_;
};

}  // namespace cluslasso
