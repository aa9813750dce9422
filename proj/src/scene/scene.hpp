// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "common/body.hpp"
#include "scene/math.hpp"

namespace previz {

// Unrecognized project-file fields, kept as raw JSON text so they survive a
// load/save cycle untouched.
using Extras = std::map<std::string, std::string>;

}  // namespace previz

namespace previz::scene {

struct Camera {
  std::string id;
  Transform transform;
  double fov_deg = 39.6;  // horizontal
  double near = 0.1;
  double far = 100.0;
  std::string label;
  Extras extras;

  friend bool operator==(const Camera&, const Camera&) = default;
};

enum class CameraPreset { kWide, kNormal, kTele };

struct PresetInfo {
  std::string_view label;
  double focal_mm;
  double fov_deg;
};

// 36 mm sensor width: fov = 2 atan(18 / focal).
PresetInfo preset_info(CameraPreset preset);
Camera make_camera(std::string id, CameraPreset preset, const Transform& pose);

enum class LightKind { kAmbient, kDirectional, kPoint };

struct Light {
  std::string id;
  LightKind kind = LightKind::kAmbient;
  Rgb color{1, 1, 1};
  double intensity = 1.0;
  Transform transform;  // ignored for ambient; directional shines along local -Z
  Extras extras;

  friend bool operator==(const Light&, const Light&) = default;
};

struct BoxGeometry {
  Vec3 size{1, 1, 1};
  friend bool operator==(const BoxGeometry&, const BoxGeometry&) = default;
};

// Lies in the local XZ plane, normal +Y.
struct PlaneGeometry {
  double width = 1;
  double depth = 1;
  friend bool operator==(const PlaneGeometry&, const PlaneGeometry&) = default;
};

struct MeshGeometry {
  std::vector<Vec3> positions;
  std::vector<std::array<std::uint32_t, 3>> triangles;
  std::vector<Rgb> colors;  // empty or one per position

  friend bool operator==(const MeshGeometry&, const MeshGeometry&) = default;
};

using ProxyGeometry = std::variant<BoxGeometry, PlaneGeometry, MeshGeometry>;

enum class EntityRole { kProp, kCharacter, kSetPiece };

// Joint offsets in entity space, indexed by body::Joint.
struct CanonicalRig {
  std::array<Vec3, body::kJointCount> joints{};
  friend bool operator==(const CanonicalRig&, const CanonicalRig&) = default;
};

// A standing humanoid about `height` meters tall, facing -Z, feet at y = 0.
CanonicalRig humanoid_rig(double height = 1.75);

struct SceneEntity {
  std::string id;
  std::string name;
  EntityRole role = EntityRole::kProp;
  ProxyGeometry geometry = BoxGeometry{};
  Transform transform;
  Rgb base_color{0.7, 0.7, 0.7};
  bool movable = false;
  std::optional<std::string> character_profile_ref;
  std::optional<CanonicalRig> rig;
  // Value written to the id raster. 0 on input means "assign the next free".
  std::uint16_t raster_id = 0;
  Extras extras;

  friend bool operator==(const SceneEntity&, const SceneEntity&) = default;
};

struct Scene {
  std::string id;
  std::vector<SceneEntity> entities;
  std::vector<Camera> cameras;
  std::vector<Light> lights;
  Rgb backdrop_color{0.05, 0.05, 0.08};
  Extras extras;

  friend bool operator==(const Scene&, const Scene&) = default;

  const SceneEntity* find_entity(std::string_view id) const;
  const Camera* find_camera(std::string_view id) const;
  const Light* find_light(std::string_view id) const;
  const SceneEntity* find_raster_id(std::uint16_t raster_id) const;
};

struct Viewport {
  int width = 1;
  int height = 1;
};

struct Projection {
  double x = 0;  // pixels, origin at the top-left image corner
  double y = 0;
  double depth = 0;  // eye-space distance along the optical axis, meters
};

struct AppearanceUpdate {
  std::optional<Rgb> color;
  std::optional<double> intensity;  // lights only
};

// Scene operations never mutate their input.
std::pair<Scene, std::string> add_entity(const Scene& scene, SceneEntity spec);
Scene remove_entity(const Scene& scene, std::string_view id);
Scene add_camera(const Scene& scene, Camera camera);
Scene add_light(const Scene& scene, Light light);
Scene set_appearance(const Scene& scene, std::string_view id, const AppearanceUpdate& update);
// Targets an entity, camera or light.
Scene set_transform(const Scene& scene, std::string_view id, const Transform& transform);
Scene update_camera(const Scene& scene, const Camera& camera);

// Throws on any violated scene invariant.
void validate_scene(const Scene& scene);
void validate_camera(const Camera& camera);
void validate_geometry(const ProxyGeometry& geometry);

std::optional<Projection> project_point(const Camera& camera, const Vec3& p,
                                        const Viewport& viewport, double margin_px = 0.0);
Vec3 unproject(const Camera& camera, double px, double py, double depth,
               const Viewport& viewport);

// Eye space: camera at the origin looking down -Z.
Vec3 world_to_eye(const Transform& camera_pose, const Vec3& p);

struct Triangle {
  std::array<Vec3, 3> v;
  Rgb color;
};

// Local-space triangles of a proxy, colored with `base` unless the mesh
// carries per-vertex colors (then the vertex mean is used).
std::vector<Triangle> geometry_triangles(const ProxyGeometry& geometry, const Rgb& base);

}  // namespace previz::scene
