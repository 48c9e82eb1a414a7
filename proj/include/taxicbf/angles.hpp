#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Core>

namespace taxicbf {

using Vec2 = Eigen::Vector2d;

// Wraps to (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double r = std::remainder(a, kTwoPi);  // [-pi, pi]
  if (r <= -std::numbers::pi) r += kTwoPi;
  return r;
}

inline Vec2 heading_vector(double theta) { return {std::cos(theta), std::sin(theta)}; }

// z-component of the planar cross product.
inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

inline double deg2rad(double d) { return d * std::numbers::pi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / std::numbers::pi; }

}  // namespace taxicbf
