#pragma once

#include <array>
#include <cmath>

namespace mat {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  bool operator==(const Vec3& o) const = default;
};

inline double planar_dist(const Vec3& a, const Vec3& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

// Wraps to [-pi, pi).
inline double wrap_angle(double a) {
  constexpr double two_pi = 6.283185307179586476925286766559;
  return a - two_pi * std::floor((a + two_pi / 2.0) / two_pi);
}

// Smallest separation between two bearings, in [0, pi].
inline double bearing_separation(double a, double b) {
  const double d = std::fabs(wrap_angle(a - b));
  return d;
}

constexpr double kPi = 3.141592653589793238462643383279;

}  // namespace mat
