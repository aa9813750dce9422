// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <numbers>

namespace previz {

// Right-handed, Y-up, meters. Cameras look down -Z.
struct Vec3 {
  double x = 0, y = 0, z = 0;

  friend bool operator==(const Vec3&, const Vec3&) = default;
  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }
inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double length(const Vec3& v) { return std::sqrt(dot(v, v)); }
inline Vec3 normalized(const Vec3& v) {
  const double n = length(v);
  return n > 0 ? v / n : Vec3{};
}
inline Vec3 hadamard(const Vec3& a, const Vec3& b) { return {a.x * b.x, a.y * b.y, a.z * b.z}; }
inline Vec3 lerp(const Vec3& a, const Vec3& b, double u) { return a + (b - a) * u; }

// Unit quaternion (w, x, y, z).
struct Quat {
  double w = 1, x = 0, y = 0, z = 0;

  friend bool operator==(const Quat&, const Quat&) = default;

  static Quat from_axis_angle(const Vec3& axis, double radians);
  static Quat from_yaw(double radians) { return from_axis_angle({0, 1, 0}, radians); }

  Quat operator*(const Quat& o) const {
    return {w * o.w - x * o.x - y * o.y - z * o.z, w * o.x + x * o.w + y * o.z - z * o.y,
            w * o.y - x * o.z + y * o.w + z * o.x, w * o.z + x * o.y - y * o.x + z * o.w};
  }
  Quat conjugate() const { return {w, -x, -y, -z}; }
  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }
  Quat normalized() const;
  bool is_unit(double tol = 1e-6) const { return std::abs(norm() - 1.0) <= tol; }
  Vec3 rotate(const Vec3& v) const;
};

inline double dot(const Quat& a, const Quat& b) {
  return a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z;
}

// Geodesic angle between two orientations, radians in [0, pi].
double angle_between(const Quat& a, const Quat& b);

// Shortest-arc slerp. When the two arcs are exactly equal (180 degrees apart)
// the arc whose midpoint has the larger +Y quaternion component is taken.
Quat slerp(const Quat& a, const Quat& b, double u);

// Row-major 3x4 affine map.
struct Affine {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};
  Vec3 t;

  Vec3 apply(const Vec3& p) const {
    return {m[0] * p.x + m[1] * p.y + m[2] * p.z + t.x,
            m[3] * p.x + m[4] * p.y + m[5] * p.z + t.y,
            m[6] * p.x + m[7] * p.y + m[8] * p.z + t.z};
  }
  Vec3 apply_linear(const Vec3& v) const {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z, m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
  }
  // (*this) after `inner`.
  Affine compose(const Affine& inner) const;
};

struct Transform {
  Vec3 translation;
  Quat rotation;
  Vec3 scale{1, 1, 1};

  friend bool operator==(const Transform&, const Transform&) = default;

  Affine to_affine() const;
  Vec3 apply(const Vec3& p) const {
    return translation + rotation.rotate(hadamard(scale, p));
  }
  bool valid() const {
    return translation.finite() && scale.finite() && rotation.is_unit() && scale.x > 0 &&
           scale.y > 0 && scale.z > 0;
  }
};

struct Rgb {
  double r = 0, g = 0, b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
  bool in_unit_range() const {
    return r >= 0 && r <= 1 && g >= 0 && g <= 1 && b >= 0 && b <= 1;
  }
};

inline Rgb lerp(const Rgb& a, const Rgb& b, double u) {
  return {a.r + (b.r - a.r) * u, a.g + (b.g - a.g) * u, a.b + (b.b - a.b) * u};
}

constexpr double deg_to_rad(double d) { return d * std::numbers::pi / 180.0; }
constexpr double rad_to_deg(double r) { return r * 180.0 / std::numbers::pi; }

}  // namespace previz
