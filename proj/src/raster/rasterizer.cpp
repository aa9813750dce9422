// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <limits>

#include "common/error.hpp"
#include "raster/raster.hpp"

namespace previz::raster {
namespace {

// Polygons are clipped to this many viewport half-extents around the image so
// snapped coordinates stay far inside the int64 edge-function range.
constexpr double kGuardBand = 16.0;

struct ClipVertex {
  Vec3 eye;
};

struct FixedVertex {
  std::int64_t x;
  std::int64_t y;
  double inv_z;
};

struct LightEval {
  scene::LightKind kind;
  Rgb radiance;  // color * intensity
  Vec3 position;
  Vec3 direction;  // directional lights: direction of travel
};

struct View {
  scene::Camera camera;
  int width;
  int height;
  double tan_h;
  double tan_v;
};

template <typename DistanceFn>
std::vector<ClipVertex> clip_polygon(const std::vector<ClipVertex>& poly, DistanceFn dist) {
  bool any_out = false;
  for (const auto& v : poly) any_out |= dist(v.eye) < 0;
  if (!any_out) return poly;
  std::vector<ClipVertex> out;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const ClipVertex& a = poly[i];
    const ClipVertex& b = poly[(i + 1) % poly.size()];
    const double da = dist(a.eye), db = dist(b.eye);
    if (da >= 0) out.push_back(a);
    if ((da >= 0) != (db >= 0)) {
      const double u = da / (da - db);
      out.push_back({lerp(a.eye, b.eye, u)});
    }
  }
  return out;
}

FixedVertex snap(const View& view, const Vec3& eye) {
  const double z = -eye.z;
  const double px = (eye.x / (z * view.tan_h) + 1) * 0.5 * view.width;
  const double py = (1 - eye.y / (z * view.tan_v)) * 0.5 * view.height;
  return {std::llround(px * kSubpixelScale), std::llround(py * kSubpixelScale), 1.0 / z};
}

std::int64_t edge(const FixedVertex& a, const FixedVertex& b, std::int64_t px, std::int64_t py) {
  return (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x);
}

bool top_left(const FixedVertex& a, const FixedVertex& b) {
  const std::int64_t dx = b.x - a.x, dy = b.y - a.y;
  return (dy == 0 && dx > 0) || dy < 0;
}

Rgb shade(const Rgb& base, const Vec3& normal, const Vec3& point,
          const std::vector<LightEval>& lights) {
  Rgb sum;
  for (const auto& l : lights) {
    double k = 0;
    switch (l.kind) {
      case scene::LightKind::kAmbient: k = 1; break;
      case scene::LightKind::kDirectional:
        k = std::max(0.0, -dot(normal, l.direction));
        break;
      case scene::LightKind::kPoint: {
        const Vec3 to_light = l.position - point;
        const double d2 = dot(to_light, to_light);
        if (d2 <= 0) break;
        k = std::max(0.0, dot(normal, to_light) / std::sqrt(d2)) / (1 + d2);
        break;
      }
    }
    sum.r += l.radiance.r * k;
    sum.g += l.radiance.g * k;
    sum.b += l.radiance.b * k;
  }
  return {base.r * sum.r, base.g * sum.g, base.b * sum.b};
}

std::uint8_t to_u8(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

const LegendEntry* ConditioningFrame::find(std::uint16_t raster_id) const {
  for (const auto& e : legend) {
    if (e.raster_id == raster_id) return &e;
  }
  return nullptr;
}

std::uint8_t encode_depth(double z, double near, double far) {
  const double v = 255.0 * (1.0 / z - 1.0 / far) / (1.0 / near - 1.0 / far);
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
}

timeline::FrameState static_state(const scene::Scene& scene, const scene::Camera& camera) {
  timeline::FrameState fs;
  fs.camera = camera;
  for (const auto& e : scene.entities) fs.entities.push_back({e.id, e.transform, e.base_color});
  for (const auto& l : scene.lights) fs.lights.push_back({l.id, l.color, l.intensity});
  return fs;
}

ConditioningFrame render_frame(const scene::Scene& scene, const timeline::FrameState& state,
                               RenderSize size) {
  if (size.width < kMinSize || size.width > kMaxSize || size.height < kMinSize ||
      size.height > kMaxSize) {
    fail(Errc::kInvalidArgument, "render size must be within [16, 4096]");
  }
  const scene::Camera& cam = state.camera;
  if (!(cam.near > 0) || !(cam.near < cam.far)) {
    fail(Errc::kDegenerateCamera, "camera near must be in (0, far)");
  }
  if (!(cam.fov_deg > 1 && cam.fov_deg < 179)) {
    fail(Errc::kInvalidArgument, "camera fov must be in (1, 179)");
  }
  if (scene.lights.empty()) fail(Errc::kInvalidArgument, "scene has no lights");

  View view{cam, size.width, size.height, std::tan(deg_to_rad(cam.fov_deg) / 2), 0};
  view.tan_v = view.tan_h * size.height / size.width;

  std::vector<LightEval> lights;
  for (const auto& l : scene.lights) {
    Rgb color = l.color;
    double intensity = l.intensity;
    for (const auto& ls : state.lights) {
      if (ls.id == l.id) {
        color = ls.color;
        intensity = ls.intensity;
      }
    }
    lights.push_back({l.kind,
                      {color.r * intensity, color.g * intensity, color.b * intensity},
                      l.transform.translation,
                      l.transform.rotation.rotate({0, 0, -1})});
  }

  ConditioningFrame frame;
  frame.width = size.width;
  frame.height = size.height;
  const std::uint8_t bg[3] = {to_u8(scene.backdrop_color.r), to_u8(scene.backdrop_color.g),
                              to_u8(scene.backdrop_color.b)};
  frame.color = RgbImage(size.width, size.height);
  for (std::size_t i = 0; i < frame.color.pixel_count(); ++i) {
    frame.color.data[i * 3] = bg[0];
    frame.color.data[i * 3 + 1] = bg[1];
    frame.color.data[i * 3 + 2] = bg[2];
  }
  frame.depth = GrayImage(size.width, size.height, 0);
  frame.id = Gray16Image(size.width, size.height, 0);
  std::vector<double> zbuf(frame.color.pixel_count(), 1.0 / cam.far);

  const double near = cam.near;
  const double inv_far = 1.0 / cam.far;
  const Vec3 cam_pos = cam.transform.translation;

  for (const auto& entity : scene.entities) {
    frame.legend.push_back({entity.raster_id, entity.id,
                            entity.character_profile_ref.value_or(entity.id),
                            entity.role == scene::EntityRole::kCharacter});
    Transform pose = entity.transform;
    Rgb base = entity.base_color;
    for (const auto& es : state.entities) {
      if (es.id == entity.id) {
        pose = es.transform;
        base = es.color;
      }
    }
    const Affine to_world = pose.to_affine();
    for (const auto& tri : scene::geometry_triangles(entity.geometry, base)) {
      std::array<Vec3, 3> world;
      std::vector<ClipVertex> poly;
      for (int k = 0; k < 3; ++k) {
        world[k] = to_world.apply(tri.v[k]);
        poly.push_back({scene::world_to_eye(cam.transform, world[k])});
      }
      Vec3 normal = normalized(cross(world[1] - world[0], world[2] - world[0]));
      if (length(normal) == 0) continue;

      // Vertices within rounding error of the near plane count as on it.
      poly = clip_polygon(poly, [&](const Vec3& e) { return -e.z - near * (1 - 1e-12); });
      poly = clip_polygon(poly, [&](const Vec3& e) { return kGuardBand * -e.z * view.tan_h - e.x; });
      poly = clip_polygon(poly, [&](const Vec3& e) { return kGuardBand * -e.z * view.tan_h + e.x; });
      poly = clip_polygon(poly, [&](const Vec3& e) { return kGuardBand * -e.z * view.tan_v - e.y; });
      poly = clip_polygon(poly, [&](const Vec3& e) { return kGuardBand * -e.z * view.tan_v + e.y; });
      if (poly.size() < 3) continue;

      std::vector<FixedVertex> fv;
      for (const auto& v : poly) fv.push_back(snap(view, v.eye));

      for (std::size_t k = 1; k + 1 < fv.size(); ++k) {
        FixedVertex a = fv[0], b = fv[k], c = fv[k + 1];
        std::int64_t area = edge(a, b, c.x, c.y);
        if (area == 0) continue;
        if (area < 0) {
          std::swap(b, c);
          area = -area;
        }
        const std::int64_t min_x = std::min({a.x, b.x, c.x}), max_x = std::max({a.x, b.x, c.x});
        const std::int64_t min_y = std::min({a.y, b.y, c.y}), max_y = std::max({a.y, b.y, c.y});
        const std::int64_t half = kSubpixelScale / 2;
        auto ceil_div = [](std::int64_t n, std::int64_t d) {
          return n >= 0 ? (n + d - 1) / d : -((-n) / d);
        };
        auto floor_div = [](std::int64_t n, std::int64_t d) {
          return n >= 0 ? n / d : -((-n + d - 1) / d);
        };
        const int x0 = static_cast<int>(std::max<std::int64_t>(0, ceil_div(min_x - half, kSubpixelScale)));
        const int x1 = static_cast<int>(std::min<std::int64_t>(size.width - 1, floor_div(max_x - half, kSubpixelScale)));
        const int y0 = static_cast<int>(std::max<std::int64_t>(0, ceil_div(min_y - half, kSubpixelScale)));
        const int y1 = static_cast<int>(std::min<std::int64_t>(size.height - 1, floor_div(max_y - half, kSubpixelScale)));
        if (x0 > x1 || y0 > y1) continue;

        const std::int64_t bias0 = top_left(b, c) ? 0 : -1;
        const std::int64_t bias1 = top_left(c, a) ? 0 : -1;
        const std::int64_t bias2 = top_left(a, b) ? 0 : -1;
        const double inv_area = 1.0 / static_cast<double>(area);

        for (int py = y0; py <= y1; ++py) {
          const std::int64_t sy = static_cast<std::int64_t>(py) * kSubpixelScale + half;
          for (int px = x0; px <= x1; ++px) {
            const std::int64_t sx = static_cast<std::int64_t>(px) * kSubpixelScale + half;
            const std::int64_t e0 = edge(b, c, sx, sy);
            const std::int64_t e1 = edge(c, a, sx, sy);
            const std::int64_t e2 = edge(a, b, sx, sy);
            if (e0 + bias0 < 0 || e1 + bias1 < 0 || e2 + bias2 < 0) continue;
            const double inv_z = (static_cast<double>(e0) * a.inv_z +
                                  static_cast<double>(e1) * b.inv_z +
                                  static_cast<double>(e2) * c.inv_z) * inv_area;
            const std::size_t pix = static_cast<std::size_t>(py) * size.width + px;
            if (inv_z < inv_far || !(inv_z > zbuf[pix])) continue;
            zbuf[pix] = inv_z;
            const double z = 1.0 / inv_z;
            const double ndc_x = (px + 0.5) / size.width * 2 - 1;
            const double ndc_y = 1 - (py + 0.5) / size.height * 2;
            const Vec3 eye{ndc_x * z * view.tan_h, ndc_y * z * view.tan_v, -z};
            const Vec3 p = cam.transform.rotation.rotate(eye) + cam.transform.translation;
            Vec3 n = normal;
            if (dot(n, cam_pos - p) < 0) n = -n;
            const Rgb lit = shade(tri.color, n, p, lights);
            std::uint8_t* dst = frame.color.at(px, py);
            dst[0] = to_u8(lit.r);
            dst[1] = to_u8(lit.g);
            dst[2] = to_u8(lit.b);
            frame.id.data[pix] = entity.raster_id;
            frame.depth.data[pix] = encode_depth(z, near, cam.far);
          }
        }
      }
    }
  }
  return frame;
}

}  // namespace previz::raster
