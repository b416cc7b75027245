#include "cluslasso/rng.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <cmath>

namespace cluslasso {

double Rng::uniform() {
  const std::uint64_t r = engine_() >> 11;
  return (static_cast<double>(r) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
  // Phi^{-1}(u) = -sqrt(2) erfc^{-1}(2u)
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * uniform());
}

}  // namespace cluslasso
