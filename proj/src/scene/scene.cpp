// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

#include "scene/scene.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"

namespace previz::scene {
namespace {

bool id_taken(const Scene& scene, std::string_view id) {
  return scene.find_entity(id) != nullptr || scene.find_camera(id) != nullptr ||
         scene.find_light(id) != nullptr;
}

void require_fresh_id(const Scene& scene, const std::string& id) {
  if (id.empty()) fail(Errc::kInvalidArgument, "empty id");
  if (id_taken(scene, id)) fail(Errc::kDuplicateId, "id already in scene: " + id);
}

void require_color(const Rgb& c, std::string_view what) {
  if (!c.in_unit_range()) {
    fail(Errc::kColorOutOfRange, std::string(what) + " color outside [0,1]");
  }
}

void validate_entity(const SceneEntity& e) {
  validate_geometry(e.geometry);
  if (!e.transform.valid()) fail(Errc::kInvalidArgument, "invalid transform on " + e.id);
  require_color(e.base_color, e.id);
  if (e.rig && e.role == EntityRole::kProp) {
    fail(Errc::kInvalidArgument, "props cannot carry a rig: " + e.id);
  }
  if (e.rig) {
    for (const Vec3& j : e.rig->joints) {
      if (!j.finite()) fail(Errc::kInvalidArgument, "non-finite rig joint on " + e.id);
    }
  }
}

void validate_light(const Light& l) {
  if (l.id.empty()) fail(Errc::kInvalidArgument, "empty light id");
  require_color(l.color, l.id);
  if (!std::isfinite(l.intensity) || l.intensity < 0) {
    fail(Errc::kInvalidArgument, "light intensity must be finite and >= 0: " + l.id);
  }
  if (l.kind != LightKind::kAmbient && !l.transform.valid()) {
    fail(Errc::kInvalidArgument, "invalid light transform: " + l.id);
  }
}

}  // namespace

PresetInfo preset_info(CameraPreset preset) {
  switch (preset) {
    case CameraPreset::kWide: return {"Wide 24mm", 24.0, 73.7};
    case CameraPreset::kNormal: return {"Normal 50mm", 50.0, 39.6};
    case CameraPreset::kTele: return {"Tele 85mm", 85.0, 23.9};
  }
  return {"Normal 50mm", 50.0, 39.6};
}

Camera make_camera(std::string id, CameraPreset preset, const Transform& pose) {
  const PresetInfo info = preset_info(preset);
  Camera cam;
  cam.id = std::move(id);
  cam.transform = pose;
  cam.fov_deg = info.fov_deg;
  cam.label = std::string(info.label);
  return cam;
}

CanonicalRig humanoid_rig(double height) {
  const double s = height / 1.75;
  CanonicalRig rig;
  auto set = [&](int j, double x, double y, double z) { rig.joints[j] = Vec3{x, y, z} * s; };
  set(body::kNose, 0, 1.62, -0.09);
  set(body::kNeck, 0, 1.50, 0);
  set(body::kRightShoulder, 0.20, 1.45, 0);
  set(body::kRightElbow, 0.25, 1.15, 0);
  set(body::kRightWrist, 0.27, 0.88, 0);
  set(body::kLeftShoulder, -0.20, 1.45, 0);
  set(body::kLeftElbow, -0.25, 1.15, 0);
  set(body::kLeftWrist, -0.27, 0.88, 0);
  set(body::kRightHip, 0.10, 0.95, 0);
  set(body::kRightKnee, 0.10, 0.50, 0);
  set(body::kRightAnkle, 0.10, 0.08, 0);
  set(body::kLeftHip, -0.10, 0.95, 0);
  set(body::kLeftKnee, -0.10, 0.50, 0);
  set(body::kLeftAnkle, -0.10, 0.08, 0);
  set(body::kRightEye, 0.035, 1.66, -0.07);
  set(body::kLeftEye, -0.035, 1.66, -0.07);
  set(body::kRightEar, 0.08, 1.63, 0);
  set(body::kLeftEar, -0.08, 1.63, 0);
  return rig;
}

const SceneEntity* Scene::find_entity(std::string_view id) const {
  for (const auto& e : entities) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

const Camera* Scene::find_camera(std::string_view id) const {
  for (const auto& c : cameras) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

const Light* Scene::find_light(std::string_view id) const {
  for (const auto& l : lights) {
    if (l.id == id) return &l;
  }
  return nullptr;
}

const SceneEntity* Scene::find_raster_id(std::uint16_t raster_id) const {
  for (const auto& e : entities) {
    if (e.raster_id == raster_id) return &e;
  }
  return nullptr;
}

void validate_geometry(const ProxyGeometry& geometry) {
  if (const auto* box = std::get_if<BoxGeometry>(&geometry)) {
    if (!box->size.finite() || box->size.x <= 0 || box->size.y <= 0 || box->size.z <= 0) {
      fail(Errc::kInvalidGeometry, "box size must be finite and positive");
    }
  } else if (const auto* plane = std::get_if<PlaneGeometry>(&geometry)) {
    if (!std::isfinite(plane->width) || !std::isfinite(plane->depth) || plane->width <= 0 ||
        plane->depth <= 0) {
      fail(Errc::kInvalidGeometry, "plane size must be finite and positive");
    }
  } else {
    const auto& mesh = std::get<MeshGeometry>(geometry);
    if (mesh.triangles.empty()) fail(Errc::kInvalidGeometry, "mesh has no triangles");
    for (const Vec3& p : mesh.positions) {
      if (!p.finite()) fail(Errc::kInvalidGeometry, "non-finite mesh vertex");
    }
    for (const auto& tri : mesh.triangles) {
      for (std::uint32_t i : tri) {
        if (i >= mesh.positions.size()) fail(Errc::kInvalidGeometry, "mesh index out of range");
      }
    }
    if (!mesh.colors.empty() && mesh.colors.size() != mesh.positions.size()) {
      fail(Errc::kInvalidGeometry, "mesh color count must match vertex count");
    }
    for (const Rgb& c : mesh.colors) {
      if (!c.in_unit_range()) fail(Errc::kInvalidGeometry, "mesh vertex color outside [0,1]");
    }
  }
}

void validate_camera(const Camera& camera) {
  if (camera.id.empty()) fail(Errc::kInvalidArgument, "empty camera id");
  if (!(camera.fov_deg > 1 && camera.fov_deg < 179)) {
    fail(Errc::kInvalidArgument, "camera fov must be in (1, 179): " + camera.id);
  }
  if (!(camera.near > 0) || !std::isfinite(camera.far)) {
    fail(Errc::kDegenerateCamera, "camera near must be > 0: " + camera.id);
  }
  if (!(camera.near < camera.far)) {
    fail(Errc::kDegenerateCamera, "camera near must be < far: " + camera.id);
  }
  if (!camera.transform.translation.finite() || !camera.transform.rotation.is_unit()) {
    fail(Errc::kInvalidArgument, "invalid camera pose: " + camera.id);
  }
}

void validate_scene(const Scene& scene) {
  if (scene.cameras.empty()) fail(Errc::kInvalidArgument, "scene needs at least one camera");
  require_color(scene.backdrop_color, "backdrop");
  std::vector<std::string_view> ids;
  std::vector<std::uint16_t> raster_ids;
  for (const auto& e : scene.entities) {
    validate_entity(e);
    ids.push_back(e.id);
    if (e.raster_id == 0) fail(Errc::kInvalidArgument, "entity without raster id: " + e.id);
    raster_ids.push_back(e.raster_id);
  }
  for (const auto& c : scene.cameras) {
    validate_camera(c);
    ids.push_back(c.id);
  }
  for (const auto& l : scene.lights) {
    validate_light(l);
    ids.push_back(l.id);
  }
  std::sort(ids.begin(), ids.end());
  if (auto it = std::adjacent_find(ids.begin(), ids.end()); it != ids.end()) {
    fail(Errc::kDuplicateId, "duplicate id in scene: " + std::string(*it));
  }
  std::sort(raster_ids.begin(), raster_ids.end());
  if (std::adjacent_find(raster_ids.begin(), raster_ids.end()) != raster_ids.end()) {
    fail(Errc::kDuplicateId, "duplicate raster id in scene " + scene.id);
  }
}

std::pair<Scene, std::string> add_entity(const Scene& scene, SceneEntity spec) {
  require_fresh_id(scene, spec.id);
  validate_entity(spec);
  if (spec.raster_id == 0) {
    std::uint32_t next = 1;
    for (const auto& e : scene.entities) next = std::max<std::uint32_t>(next, e.raster_id + 1u);
    if (next > 0xffff) fail(Errc::kInvalidArgument, "raster id space exhausted");
    spec.raster_id = static_cast<std::uint16_t>(next);
  } else if (scene.find_raster_id(spec.raster_id) != nullptr) {
    fail(Errc::kDuplicateId, "raster id already used: " + std::to_string(spec.raster_id));
  }
  Scene out = scene;
  std::string id = spec.id;
  out.entities.push_back(std::move(spec));
  return {std::move(out), std::move(id)};
}

Scene remove_entity(const Scene& scene, std::string_view id) {
  Scene out = scene;
  auto it = std::find_if(out.entities.begin(), out.entities.end(),
                         [&](const SceneEntity& e) { return e.id == id; });
  if (it == out.entities.end()) fail(Errc::kUnknownId, "unknown entity: " + std::string(id));
  out.entities.erase(it);
  return out;
}

Scene add_camera(const Scene& scene, Camera camera) {
  require_fresh_id(scene, camera.id);
  validate_camera(camera);
  Scene out = scene;
  out.cameras.push_back(std::move(camera));
  return out;
}

Scene add_light(const Scene& scene, Light light) {
  require_fresh_id(scene, light.id);
  validate_light(light);
  Scene out = scene;
  out.lights.push_back(std::move(light));
  return out;
}

Scene set_appearance(const Scene& scene, std::string_view id, const AppearanceUpdate& update) {
  if (update.color) require_color(*update.color, id);
  Scene out = scene;
  for (auto& e : out.entities) {
    if (e.id != id) continue;
    if (update.intensity) fail(Errc::kInvalidArgument, "entities have no intensity");
    if (update.color) e.base_color = *update.color;
    return out;
  }
  for (auto& l : out.lights) {
    if (l.id != id) continue;
    if (update.color) l.color = *update.color;
    if (update.intensity) l.intensity = *update.intensity;
    validate_light(l);
    return out;
  }
  fail(Errc::kUnknownId, "unknown entity or light: " + std::string(id));
}

Scene set_transform(const Scene& scene, std::string_view id, const Transform& transform) {
  if (!transform.valid()) fail(Errc::kInvalidArgument, "invalid transform");
  Scene out = scene;
  for (auto& e : out.entities) {
    if (e.id == id) {
      e.transform = transform;
      return out;
    }
  }
  for (auto& c : out.cameras) {
    if (c.id == id) {
      c.transform = transform;
      return out;
    }
  }
  for (auto& l : out.lights) {
    if (l.id == id) {
      l.transform = transform;
      return out;
    }
  }
  fail(Errc::kUnknownId, "unknown id: " + std::string(id));
}

Scene update_camera(const Scene& scene, const Camera& camera) {
  validate_camera(camera);
  Scene out = scene;
  for (auto& c : out.cameras) {
    if (c.id == camera.id) {
      c = camera;
      return out;
    }
  }
  fail(Errc::kUnknownId, "unknown camera: " + camera.id);
}

Vec3 world_to_eye(const Transform& camera_pose, const Vec3& p) {
  return camera_pose.rotation.conjugate().rotate(p - camera_pose.translation);
}

std::optional<Projection> project_point(const Camera& camera, const Vec3& p,
                                        const Viewport& viewport, double margin_px) {
  if (viewport.width < 1 || viewport.height < 1) {
    fail(Errc::kInvalidArgument, "viewport must be at least 1x1");
  }
  const Vec3 eye = world_to_eye(camera.transform, p);
  const double z = -eye.z;
  if (z < camera.near || z > camera.far) return std::nullopt;
  const double tan_h = std::tan(deg_to_rad(camera.fov_deg) / 2);
  const double tan_v = tan_h * viewport.height / viewport.width;
  const double ndc_x = eye.x / (z * tan_h);
  const double ndc_y = eye.y / (z * tan_v);
  Projection out;
  out.x = (ndc_x + 1) * 0.5 * viewport.width;
  out.y = (1 - ndc_y) * 0.5 * viewport.height;
  out.depth = z;
  constexpr double kEps = 1e-9;
  const double m = margin_px + kEps;
  if (out.x < -m || out.x > viewport.width + m || out.y < -m || out.y > viewport.height + m) {
    return std::nullopt;
  }
  return out;
}

Vec3 unproject(const Camera& camera, double px, double py, double depth,
               const Viewport& viewport) {
  const double tan_h = std::tan(deg_to_rad(camera.fov_deg) / 2);
  const double tan_v = tan_h * viewport.height / viewport.width;
  const double ndc_x = px / viewport.width * 2 - 1;
  const double ndc_y = 1 - py / viewport.height * 2;
  const Vec3 eye{ndc_x * depth * tan_h, ndc_y * depth * tan_v, -depth};
  return camera.transform.rotation.rotate(eye) + camera.transform.translation;
}

std::vector<Triangle> geometry_triangles(const ProxyGeometry& geometry, const Rgb& base) {
  std::vector<Triangle> out;
  if (const auto* box = std::get_if<BoxGeometry>(&geometry)) {
    const Vec3 h = box->size * 0.5;
    auto corner = [&](int i) {
      return Vec3{(i & 1) ? h.x : -h.x, (i & 2) ? h.y : -h.y, (i & 4) ? h.z : -h.z};
    };
    // Two triangles per face, outward counter-clockwise winding.
    static constexpr int kQuads[6][4] = {{0, 4, 6, 2}, {1, 3, 7, 5}, {0, 1, 5, 4},
                                         {2, 6, 7, 3}, {0, 2, 3, 1}, {4, 5, 7, 6}};
    for (const auto& q : kQuads) {
      out.push_back({{corner(q[0]), corner(q[1]), corner(q[2])}, base});
      out.push_back({{corner(q[0]), corner(q[2]), corner(q[3])}, base});
    }
  } else if (const auto* plane = std::get_if<PlaneGeometry>(&geometry)) {
    const double hw = plane->width / 2, hd = plane->depth / 2;
    const Vec3 a{-hw, 0, -hd}, b{-hw, 0, hd}, c{hw, 0, hd}, d{hw, 0, -hd};
    out.push_back({{a, b, c}, base});
    out.push_back({{a, c, d}, base});
  } else {
    const auto& mesh = std::get<MeshGeometry>(geometry);
    for (const auto& tri : mesh.triangles) {
      Triangle t{{mesh.positions[tri[0]], mesh.positions[tri[1]], mesh.positions[tri[2]]}, base};
      if (!mesh.colors.empty()) {
        const Rgb& c0 = mesh.colors[tri[0]];
        const Rgb& c1 = mesh.colors[tri[1]];
        const Rgb& c2 = mesh.colors[tri[2]];
        t.color = {(c0.r + c1.r + c2.r) / 3, (c0.g + c1.g + c2.g) / 3, (c0.b + c1.b + c2.b) / 3};
      }
      out.push_back(t);
    }
  }
  return out;
}

}  // namespace previz::scene
