#include "rfaug/random.hpp"

#include <cmath>
#include <numbers>

namespace rfaug {

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // 1 - uniform() lies in (0, 1], so the log is finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::complex<double> Rng::complex_normal(double variance) {
  const double scale = std::sqrt(variance / 2.0);
  const double re = normal();
  const double im = normal();
  return {scale * re, scale * im};
}

}  // namespace rfaug
