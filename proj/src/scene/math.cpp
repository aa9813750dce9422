// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

#include "scene/math.hpp"

#include <algorithm>

namespace previz {

Quat Quat::from_axis_angle(const Vec3& axis, double radians) {
  const Vec3 a = previz::normalized(axis);
  const double s = std::sin(radians / 2);
  return {std::cos(radians / 2), a.x * s, a.y * s, a.z * s};
}

Quat Quat::normalized() const {
  const double n = norm();
  if (n == 0) return {};
  return {w / n, x / n, y / n, z / n};
}

Vec3 Quat::rotate(const Vec3& v) const {
  // v' = v + 2w(u x v) + 2 u x (u x v)
  const Vec3 u{x, y, z};
  const Vec3 c = cross(u, v);
  return v + c * (2 * w) + cross(u, c) * 2;
}

double angle_between(const Quat& a, const Quat& b) {
  // atan2 of the relative rotation keeps precision near zero, unlike acos.
  const Quat r = a.conjugate() * b;
  return 2 * std::atan2(std::sqrt(r.x * r.x + r.y * r.y + r.z * r.z), std::abs(r.w));
}

Quat slerp(const Quat& a, const Quat& b, double u) {
  double d = dot(a, b);
  Quat target = b;
  if (d < 0) {
    d = -d;
    target = {-b.w, -b.x, -b.y, -b.z};
  } else if (d == 0) {
    const double y_plus = a.y + b.y;
    const double y_minus = a.y - b.y;
    if (y_minus > y_plus) target = {-b.w, -b.x, -b.y, -b.z};
  }
  if (d > 1 - 1e-12) {
    Quat q{a.w + (target.w - a.w) * u, a.x + (target.x - a.x) * u,
           a.y + (target.y - a.y) * u, a.z + (target.z - a.z) * u};
    return q.normalized();
  }
  const double theta = std::acos(std::min(1.0, d));
  const double s = std::sin(theta);
  const double wa = std::sin((1 - u) * theta) / s;
  const double wb = std::sin(u * theta) / s;
  Quat q{wa * a.w + wb * target.w, wa * a.x + wb * target.x, wa * a.y + wb * target.y,
         wa * a.z + wb * target.z};
  return q.normalized();
}

Affine Affine::compose(const Affine& inner) const {
  Affine out;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      out.m[r * 3 + c] = m[r * 3] * inner.m[c] + m[r * 3 + 1] * inner.m[3 + c] +
                         m[r * 3 + 2] * inner.m[6 + c];
    }
  }
  out.t = apply(inner.t);
  return out;
}

Affine Transform::to_affine() const {
  const Vec3 cx = rotation.rotate({scale.x, 0, 0});
  const Vec3 cy = rotation.rotate({0, scale.y, 0});
  const Vec3 cz = rotation.rotate({0, 0, scale.z});
  Affine a;
  a.m = {cx.x, cy.x, cz.x, cx.y, cy.y, cz.y, cx.z, cy.z, cz.z};
  a.t = translation;
  return a;
}

}  // namespace previz
