#pragma once

#include <cmath>
#include <numbers>

namespace qrotor {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Wrap an angle to the half-open interval [-pi, pi).
inline double wrap_angle(double a) {
  a = std::fmod(a + pi, two_pi);
  if (a < 0.0) a += two_pi;
  return a - pi;
}

// Geodesic distance on the unit circle, in [0, pi]. The antipode is the cut
// locus: d(0, pi) = pi, and the distance has a cusp there.
inline double circle_distance(double a, double b) {
  double d = std::fabs(wrap_angle(a) - wrap_angle(b));
  return d > pi ? two_pi - d : d;
}

}  // namespace qrotor
