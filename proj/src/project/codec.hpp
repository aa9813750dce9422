// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

// JSON encodings of the project model, shared by project files and the HTTP
// API. Decoders throw SchemaError on malformed input; unknown object keys are
// kept in the owning value's extras.

#pragma once

#include "json.hpp"
#include "project/project.hpp"

namespace previz::project::codec {

using nlohmann::json;

json encode(const Vec3& v);
json encode(const Quat& q);
json encode(const Rgb& c);
json encode(const Transform& t);
Vec3 decode_vec3(const json& j);
Quat decode_quat(const json& j);
Rgb decode_rgb(const json& j);
Transform decode_transform(const json& j);

json encode(const scene::ProxyGeometry& g);
json encode(const scene::Camera& c);
json encode(const scene::Light& l);
json encode(const scene::SceneEntity& e);
json encode(const scene::Scene& s);
scene::ProxyGeometry decode_geometry(const json& j);
scene::Camera decode_camera(const json& j);
scene::Light decode_light(const json& j);
scene::SceneEntity decode_entity(const json& j);
scene::Scene decode_scene(const json& j);

json encode(const timeline::Keyframe& k);
json encode(const timeline::MotionPath& p);
json encode(const timeline::Track& t);
json encode(const timeline::Clip& c);
json encode(const timeline::Timeline& t);
timeline::Keyframe decode_keyframe(const json& j);
timeline::MotionPath decode_path(const json& j);
timeline::Track decode_track(const json& j);
timeline::Clip decode_clip(const json& j);
timeline::Timeline decode_timeline(const json& j);

json encode(const skeleton::PersonPose& p);
json encode(const skeleton::SkeletonLayer& l);
skeleton::PersonPose decode_pose(const json& j);
skeleton::SkeletonLayer decode_layer(const json& j);

json encode_ref(const AssetRef& r);
AssetRef decode_ref(const json& j);
json encode(const style::StyleRegistry& r);
style::StyleRegistry decode_styles(const json& j);

json encode(const SkeletonEntry& s);
json encode(const HistoryEntry& h);
json encode(const Project& p);
SkeletonEntry decode_skeleton_entry(const json& j);
HistoryEntry decode_history_entry(const json& j);
// SchemaVersionMismatch for another schema version.
Project decode_project(const json& j);

}  // namespace previz::project::codec
