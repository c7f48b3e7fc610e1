#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "qrotor/circle.hpp"

namespace qrotor {

// Draws are built directly on the mt19937_64 output stream. The engine is
// bit-exact across standard libraries; the std:: distributions are not, so
// uniform and Gaussian variates are generated in-house to keep seeded runs
// reproducible everywhere.

// 53-bit uniform in [0, 1).
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform in (-half_width, half_width).
inline double uniform_symmetric(std::mt19937_64& rng, double half_width) {
  return half_width * (2.0 * uniform01(rng) - 1.0);
}

// Standard normal via Box-Muller, consuming two engine outputs per pair.
class Gaussian {
 public:
  double operator()(std::mt19937_64& rng) {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform01(rng);  // (0, 1], keeps the log finite
    double u2 = uniform01(rng);
    double rad = std::sqrt(-2.0 * std::log(u1));
    spare_ = rad * std::sin(two_pi * u2);
    have_spare_ = true;
    return rad * std::cos(two_pi * u2);
  }

 private:
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace qrotor
