// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <initializer_list>

#include "common/hash.hpp"
#include "common/text.hpp"
#include "gateway/wire.hpp"
#include "project/codec.hpp"

namespace previz::project {

using nlohmann::json;

namespace {

[[noreturn]] void corrupt(const std::string& what) { fail(Errc::kSchemaError, what); }

const json& at(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) corrupt(std::string("missing field '") + key + "'");
  return j.at(key);
}

template <typename T>
T get(const json& j, const char* key) {
  try {
    return at(j, key).get<T>();
  } catch (const json::exception&) {
    corrupt(std::string("field '") + key + "' has the wrong type");
  }
}

const json& arr(const json& j, const char* key) {
  const json& v = at(j, key);
  if (!v.is_array()) corrupt(std::string("field '") + key + "' must be an array");
  return v;
}

double num(const json& v) {
  if (!v.is_number()) corrupt("expected a number");
  return v.get<double>();
}

Extras take_extras(const json& j, std::initializer_list<std::string_view> known) {
  Extras out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end()) out[it.key()] = it.value().dump();
  }
  return out;
}

void put_extras(json& j, const Extras& e) {
  for (const auto& [k, v] : e) {
    if (j.contains(k)) continue;
    try {
      j[k] = json::parse(v);
    } catch (const json::exception&) {
      fail(Errc::kInvalidArgument, "extra field '" + k + "' is not valid JSON");
    }
  }
}

template <typename Enum, std::size_t N>
std::string_view enum_name(Enum v, const std::pair<Enum, std::string_view> (&table)[N]) {
  for (const auto& [e, n] : table) {
    if (e == v) return n;
  }
  return "?";
}

template <typename Enum, std::size_t N>
Enum enum_value(const std::string& s, const std::pair<Enum, std::string_view> (&table)[N]) {
  for (const auto& [e, n] : table) {
    if (n == s) return e;
  }
  corrupt("unknown enum value '" + s + "'");
}

constexpr std::pair<scene::EntityRole, std::string_view> kRoles[] = {
    {scene::EntityRole::kProp, "prop"},
    {scene::EntityRole::kCharacter, "character"},
    {scene::EntityRole::kSetPiece, "set_piece"}};
constexpr std::pair<scene::LightKind, std::string_view> kLightKinds[] = {
    {scene::LightKind::kAmbient, "ambient"},
    {scene::LightKind::kDirectional, "directional"},
    {scene::LightKind::kPoint, "point"}};
constexpr std::pair<timeline::Easing, std::string_view> kEasings[] = {
    {timeline::Easing::kLinear, "linear"}, {timeline::Easing::kEaseInOut, "ease_in_out"}};
constexpr std::pair<timeline::PathSource, std::string_view> kPathSources[] = {
    {timeline::PathSource::kRecorded, "recorded"}, {timeline::PathSource::kAuthored, "authored"}};
constexpr std::pair<timeline::TrackKind, std::string_view> kTrackKinds[] = {
    {timeline::TrackKind::kCamera, "camera"},
    {timeline::TrackKind::kElementAnimation, "element_animation"},
    {timeline::TrackKind::kFixedElement, "fixed_element"}};
constexpr std::pair<timeline::Channel, std::string_view> kChannels[] = {
    {timeline::Channel::kTransform, "transform"},
    {timeline::Channel::kFov, "fov"},
    {timeline::Channel::kColor, "color"},
    {timeline::Channel::kIntensity, "intensity"}};
constexpr std::pair<timeline::ClipStatus, std::string_view> kClipStatuses[] = {
    {timeline::ClipStatus::kDraft, "draft"},
    {timeline::ClipStatus::kRendered, "rendered"},
    {timeline::ClipStatus::kSubmitted, "submitted"},
    {timeline::ClipStatus::kGenerated, "generated"},
    {timeline::ClipStatus::kFailed, "failed"}};

}  // namespace

namespace codec {

json encode(const Vec3& v) { return json::array({v.x, v.y, v.z}); }
json encode(const Quat& q) { return json::array({q.w, q.x, q.y, q.z}); }
json encode(const Rgb& c) { return json::array({c.r, c.g, c.b}); }

const json& fixed(const json& v, std::size_t n) {
  if (!v.is_array() || v.size() != n) corrupt("expected an array of " + std::to_string(n) + " numbers");
  return v;
}

Vec3 decode_vec3(const json& v) {
  fixed(v, 3);
  return {num(v[0]), num(v[1]), num(v[2])};
}
Quat decode_quat(const json& v) {
  fixed(v, 4);
  return {num(v[0]), num(v[1]), num(v[2]), num(v[3])};
}
Rgb decode_rgb(const json& v) {
  fixed(v, 3);
  return {num(v[0]), num(v[1]), num(v[2])};
}

json encode(const Transform& t) {
  return {{"translation", encode(t.translation)}, {"rotation", encode(t.rotation)}, {"scale", encode(t.scale)}};
}
Transform decode_transform(const json& j) {
  return {decode_vec3(at(j, "translation")), decode_quat(at(j, "rotation")), decode_vec3(at(j, "scale"))};
}

json encode(const scene::ProxyGeometry& g) {
  if (const auto* b = std::get_if<scene::BoxGeometry>(&g)) return {{"type", "box"}, {"size", encode(b->size)}};
  if (const auto* p = std::get_if<scene::PlaneGeometry>(&g)) {
    return {{"type", "plane"}, {"width", p->width}, {"depth", p->depth}};
  }
  const auto& m = std::get<scene::MeshGeometry>(g);
  json pos = json::array(), tris = json::array(), cols = json::array();
  for (const auto& p : m.positions) pos.push_back(encode(p));
  for (const auto& t : m.triangles) tris.push_back(json::array({t[0], t[1], t[2]}));
  for (const auto& c : m.colors) cols.push_back(encode(c));
  return {{"type", "mesh"}, {"positions", pos}, {"triangles", tris}, {"colors", cols}};
}

scene::ProxyGeometry decode_geometry(const json& j) {
  const auto type = get<std::string>(j, "type");
  if (type == "box") return scene::BoxGeometry{decode_vec3(at(j, "size"))};
  if (type == "plane") return scene::PlaneGeometry{get<double>(j, "width"), get<double>(j, "depth")};
  if (type != "mesh") corrupt("unknown geometry type '" + type + "'");
  scene::MeshGeometry m;
  for (const auto& p : arr(j, "positions")) m.positions.push_back(decode_vec3(p));
  for (const auto& t : arr(j, "triangles")) {
    fixed(t, 3);
    m.triangles.push_back({t[0].get<std::uint32_t>(), t[1].get<std::uint32_t>(), t[2].get<std::uint32_t>()});
  }
  for (const auto& c : arr(j, "colors")) m.colors.push_back(decode_rgb(c));
  return m;
}

json encode(const scene::Camera& c) {
  json j = {{"id", c.id},     {"transform", encode(c.transform)}, {"fov_deg", c.fov_deg},
            {"near", c.near}, {"far", c.far},                  {"label", c.label}};
  put_extras(j, c.extras);
  return j;
}
scene::Camera decode_camera(const json& j) {
  scene::Camera c;
  c.id = get<std::string>(j, "id");
  c.transform = decode_transform(at(j, "transform"));
  c.fov_deg = get<double>(j, "fov_deg");
  c.near = get<double>(j, "near");
  c.far = get<double>(j, "far");
  c.label = get<std::string>(j, "label");
  c.extras = take_extras(j, {"id", "transform", "fov_deg", "near", "far", "label"});
  return c;
}

json encode(const scene::Light& l) {
  json j = {{"id", l.id},
            {"kind", enum_name(l.kind, kLightKinds)},
            {"color", encode(l.color)},
            {"intensity", l.intensity},
            {"transform", encode(l.transform)}};
  put_extras(j, l.extras);
  return j;
}
scene::Light decode_light(const json& j) {
  scene::Light l;
  l.id = get<std::string>(j, "id");
  l.kind = enum_value(get<std::string>(j, "kind"), kLightKinds);
  l.color = decode_rgb(at(j, "color"));
  l.intensity = get<double>(j, "intensity");
  l.transform = decode_transform(at(j, "transform"));
  l.extras = take_extras(j, {"id", "kind", "color", "intensity", "transform"});
  return l;
}

json encode(const scene::SceneEntity& e) {
  json rig = nullptr;
  if (e.rig) {
    rig = json::array();
    for (const auto& p : e.rig->joints) rig.push_back(encode(p));
  }
  json j = {{"id", e.id},
            {"name", e.name},
            {"role", enum_name(e.role, kRoles)},
            {"geometry", encode(e.geometry)},
            {"transform", encode(e.transform)},
            {"base_color", encode(e.base_color)},
            {"movable", e.movable},
            {"character_profile_ref", e.character_profile_ref ? json(*e.character_profile_ref) : json(nullptr)},
            {"rig", rig},
            {"raster_id", e.raster_id}};
  put_extras(j, e.extras);
  return j;
}
scene::SceneEntity decode_entity(const json& j) {
  scene::SceneEntity e;
  e.id = get<std::string>(j, "id");
  e.name = get<std::string>(j, "name");
  e.role = enum_value(get<std::string>(j, "role"), kRoles);
  e.geometry = decode_geometry(at(j, "geometry"));
  e.transform = decode_transform(at(j, "transform"));
  e.base_color = decode_rgb(at(j, "base_color"));
  e.movable = get<bool>(j, "movable");
  if (!at(j, "character_profile_ref").is_null()) e.character_profile_ref = get<std::string>(j, "character_profile_ref");
  if (!at(j, "rig").is_null()) {
    const json& r = fixed(at(j, "rig"), body::kJointCount);
    scene::CanonicalRig rig;
    for (int i = 0; i < body::kJointCount; ++i) rig.joints[i] = decode_vec3(r[i]);
    e.rig = rig;
  }
  e.raster_id = get<std::uint16_t>(j, "raster_id");
  e.extras = take_extras(j, {"id", "name", "role", "geometry", "transform", "base_color", "movable",
                             "character_profile_ref", "rig", "raster_id"});
  return e;
}

json encode(const timeline::Keyframe& k) {
  json v;
  if (const auto* t = std::get_if<Transform>(&k.value)) {
    v = {{"transform", encode(*t)}};
  } else if (const auto* f = std::get_if<timeline::FovDeg>(&k.value)) {
    v = {{"fov_deg", f->value}};
  } else if (const auto* c = std::get_if<Rgb>(&k.value)) {
    v = {{"color", encode(*c)}};
  } else {
    v = {{"intensity", std::get<timeline::Intensity>(k.value).value}};
  }
  return {{"t", k.t}, {"value", v}, {"easing", enum_name(k.easing, kEasings)}};
}
timeline::Keyframe decode_keyframe(const json& j) {
  timeline::Keyframe k;
  k.t = get<double>(j, "t");
  k.easing = enum_value(get<std::string>(j, "easing"), kEasings);
  const json& v = at(j, "value");
  if (!v.is_object() || v.size() != 1) corrupt("keyframe value must have exactly one field");
  if (v.contains("transform")) {
    k.value = decode_transform(v["transform"]);
  } else if (v.contains("fov_deg")) {
    k.value = timeline::FovDeg{get<double>(v, "fov_deg")};
  } else if (v.contains("color")) {
    k.value = decode_rgb(v["color"]);
  } else if (v.contains("intensity")) {
    k.value = timeline::Intensity{get<double>(v, "intensity")};
  } else {
    corrupt("unknown keyframe value");
  }
  return k;
}

json encode(const timeline::MotionPath& p) {
  json s = json::array();
  for (const auto& x : p.samples) {
    s.push_back(json::array({x.t, x.translation.x, x.translation.y, x.translation.z, x.yaw}));
  }
  return {{"entity_id", p.entity_id}, {"source", enum_name(p.source, kPathSources)}, {"samples", s}};
}
timeline::MotionPath decode_path(const json& j) {
  timeline::MotionPath p;
  p.entity_id = get<std::string>(j, "entity_id");
  p.source = enum_value(get<std::string>(j, "source"), kPathSources);
  for (const auto& s : arr(j, "samples")) {
    fixed(s, 5);
    p.samples.push_back({num(s[0]), {num(s[1]), num(s[2]), num(s[3])}, num(s[4])});
  }
  return p;
}

json encode(const timeline::Track& t) {
  json kfs = json::array(), paths = json::array();
  for (const auto& k : t.keyframes) kfs.push_back(encode(k));
  for (const auto& p : t.paths) paths.push_back(encode(p));
  json j = {{"id", t.id},
            {"kind", enum_name(t.kind, kTrackKinds)},
            {"target_id", t.target_id},
            {"channel", enum_name(t.channel, kChannels)},
            {"keyframes", kfs},
            {"paths", paths}};
  put_extras(j, t.extras);
  return j;
}
timeline::Track decode_track(const json& j) {
  timeline::Track t;
  t.id = get<std::string>(j, "id");
  t.kind = enum_value(get<std::string>(j, "kind"), kTrackKinds);
  t.target_id = get<std::string>(j, "target_id");
  t.channel = enum_value(get<std::string>(j, "channel"), kChannels);
  for (const auto& k : arr(j, "keyframes")) t.keyframes.push_back(decode_keyframe(k));
  for (const auto& p : arr(j, "paths")) t.paths.push_back(decode_path(p));
  t.extras = take_extras(j, {"id", "kind", "target_id", "channel", "keyframes", "paths"});
  return t;
}

json opt_str(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }
std::optional<std::string> decode_opt_str(const json& j, const char* key) {
  if (at(j, key).is_null()) return std::nullopt;
  return get<std::string>(j, key);
}

json encode(const timeline::Clip& c) {
  json j = {{"id", c.id},
            {"camera_id", c.camera_id},
            {"t_in", c.t_in},
            {"t_out", c.t_out},
            {"fps", c.fps},
            {"attached_style_image", opt_str(c.attached_style_image)},
            {"attached_video_result", opt_str(c.attached_video_result)},
            {"status", enum_name(c.status, kClipStatuses)}};
  put_extras(j, c.extras);
  return j;
}
timeline::Clip decode_clip(const json& j) {
  timeline::Clip c;
  c.id = get<std::string>(j, "id");
  c.camera_id = get<std::string>(j, "camera_id");
  c.t_in = get<double>(j, "t_in");
  c.t_out = get<double>(j, "t_out");
  c.fps = get<double>(j, "fps");
  c.attached_style_image = decode_opt_str(j, "attached_style_image");
  c.attached_video_result = decode_opt_str(j, "attached_video_result");
  c.status = enum_value(get<std::string>(j, "status"), kClipStatuses);
  c.extras = take_extras(j, {"id", "camera_id", "t_in", "t_out", "fps", "attached_style_image",
                             "attached_video_result", "status"});
  return c;
}

json encode(const skeleton::PersonPose& p) {
  json joints = json::array();
  for (const auto& k : p.joints) joints.push_back(json::array({k.x, k.y, k.confidence}));
  return {{"person_id", p.person_id}, {"joints", joints}};
}
skeleton::PersonPose decode_pose(const json& j) {
  skeleton::PersonPose p;
  p.person_id = get<std::int64_t>(j, "person_id");
  const json& js = fixed(at(j, "joints"), body::kJointCount);
  for (int i = 0; i < body::kJointCount; ++i) {
    fixed(js[i], 3);
    p.joints[i] = {num(js[i][0]), num(js[i][1]), num(js[i][2])};
  }
  return p;
}

json encode(const skeleton::SkeletonLayer& l) {
  json frames = json::array();
  for (const auto& f : l.frames) frames.push_back(f ? encode(*f) : json(nullptr));
  return {{"person_id", l.person_id},
          {"fps", l.fps},
          {"start_time", l.start_time},
          {"source_width", l.source_width},
          {"source_height", l.source_height},
          {"frames", frames},
          {"placement",
           {{"translate", json::array({l.placement.translate.x, l.placement.translate.y})},
            {"scale", l.placement.scale},
            {"anchor", json::array({l.placement.anchor.x, l.placement.anchor.y})}}}};
}
skeleton::SkeletonLayer decode_layer(const json& j) {
  skeleton::SkeletonLayer l;
  l.person_id = get<std::int64_t>(j, "person_id");
  l.fps = get<double>(j, "fps");
  l.start_time = get<double>(j, "start_time");
  l.source_width = get<int>(j, "source_width");
  l.source_height = get<int>(j, "source_height");
  for (const auto& f : arr(j, "frames")) {
    if (f.is_null()) {
      l.frames.emplace_back();
    } else {
      l.frames.emplace_back(decode_pose(f));
    }
  }
  const json& p = at(j, "placement");
  const json& t = fixed(at(p, "translate"), 2);
  const json& a = fixed(at(p, "anchor"), 2);
  l.placement = {{num(t[0]), num(t[1])}, get<double>(p, "scale"), {num(a[0]), num(a[1])}};
  return l;
}

json encode_ref(const AssetRef& r) { return gateway::wire::encode(r); }
AssetRef decode_ref(const json& j) {
  try {
    return gateway::wire::decode_asset_ref(j);
  } catch (const Error& e) {
    corrupt(e.what());
  }
}

json encode_lora(const std::optional<style::LoraRef>& l) {
  return l ? gateway::wire::encode(*l) : json(nullptr);
}
std::optional<style::LoraRef> decode_lora(const json& j) {
  if (j.is_null()) return std::nullopt;
  try {
    return gateway::wire::decode_lora(j);
  } catch (const Error& e) {
    corrupt(e.what());
  }
}

json encode(const style::StyleRegistry& r) {
  json styles = json::array(), chars = json::array();
  for (const auto& s : r.styles) styles.push_back({{"tag", style::style_name(s.tag)}, {"lora", encode_lora(s.lora)}});
  for (const auto& c : r.characters) {
    chars.push_back({{"character_id", c.character_id},
                     {"display_name", c.display_name},
                     {"identity_prompt", c.identity_prompt},
                     {"lora", encode_lora(c.lora)}});
  }
  return {{"styles", styles}, {"characters", chars}};
}
style::StyleRegistry decode_styles(const json& j) {
  style::StyleRegistry r;
  for (const auto& s : arr(j, "styles")) {
    const auto tag = style::parse_style(get<std::string>(s, "tag"));
    if (!tag) corrupt("unknown style tag");
    r.styles.push_back({*tag, decode_lora(at(s, "lora"))});
  }
  for (const auto& c : arr(j, "characters")) {
    r.characters.push_back({get<std::string>(c, "character_id"), get<std::string>(c, "display_name"),
                            get<std::string>(c, "identity_prompt"), decode_lora(at(c, "lora"))});
  }
  return r;
}

}  // namespace codec

const scene::Scene* Project::find_scene(std::string_view sid) const {
  for (const auto& s : scenes) {
    if (s.id == sid) return &s;
  }
  return nullptr;
}

const timeline::Timeline* Project::find_timeline(std::string_view tid) const {
  for (const auto& t : timelines) {
    if (t.id == tid) return &t;
  }
  return nullptr;
}

const timeline::Timeline* Project::timeline_of_clip(std::string_view clip_id) const {
  for (const auto& t : timelines) {
    if (t.find_clip(clip_id)) return &t;
  }
  return nullptr;
}

const SkeletonEntry* Project::find_skeleton(std::string_view sid) const {
  for (const auto& s : skeletons) {
    if (s.id == sid) return &s;
  }
  return nullptr;
}

namespace codec {

json encode(const scene::Scene& s) {
  json ents = json::array(), cams = json::array(), lights = json::array();
  for (const auto& e : s.entities) ents.push_back(encode(e));
  for (const auto& c : s.cameras) cams.push_back(encode(c));
  for (const auto& l : s.lights) lights.push_back(encode(l));
  json j = {{"id", s.id},
            {"entities", ents},
            {"cameras", cams},
            {"lights", lights},
            {"backdrop_color", encode(s.backdrop_color)}};
  put_extras(j, s.extras);
  return j;
}

scene::Scene decode_scene(const json& j) {
  scene::Scene s;
  s.id = get<std::string>(j, "id");
  for (const auto& e : arr(j, "entities")) s.entities.push_back(decode_entity(e));
  for (const auto& c : arr(j, "cameras")) s.cameras.push_back(decode_camera(c));
  for (const auto& l : arr(j, "lights")) s.lights.push_back(decode_light(l));
  s.backdrop_color = decode_rgb(at(j, "backdrop_color"));
  s.extras = take_extras(j, {"id", "entities", "cameras", "lights", "backdrop_color"});
  return s;
}

json encode(const timeline::Timeline& t) {
  json tracks = json::array(), clips = json::array();
  for (const auto& x : t.tracks) tracks.push_back(encode(x));
  for (const auto& c : t.clips) clips.push_back(encode(c));
  json j = {{"id", t.id}, {"scene_id", t.scene_id}, {"tracks", tracks}, {"clips", clips}};
  put_extras(j, t.extras);
  return j;
}

timeline::Timeline decode_timeline(const json& j) {
  timeline::Timeline t;
  t.id = get<std::string>(j, "id");
  t.scene_id = get<std::string>(j, "scene_id");
  for (const auto& x : arr(j, "tracks")) t.tracks.push_back(decode_track(x));
  for (const auto& c : arr(j, "clips")) t.clips.push_back(decode_clip(c));
  t.extras = take_extras(j, {"id", "scene_id", "tracks", "clips"});
  return t;
}

json encode(const SkeletonEntry& s) {
  json layers = json::array();
  for (const auto& l : s.layers) layers.push_back(encode(l));
  json j = {{"id", s.id},
            {"name", s.name},
            {"sequence", encode_ref(s.sequence)},
            {"layers", layers},
            {"output", s.output ? encode_ref(*s.output) : json(nullptr)}};
  put_extras(j, s.extras);
  return j;
}

SkeletonEntry decode_skeleton_entry(const json& j) {
  SkeletonEntry s;
  s.id = get<std::string>(j, "id");
  s.name = get<std::string>(j, "name");
  s.sequence = decode_ref(at(j, "sequence"));
  for (const auto& l : arr(j, "layers")) s.layers.push_back(decode_layer(l));
  if (!at(j, "output").is_null()) s.output = decode_ref(j["output"]);
  s.extras = take_extras(j, {"id", "name", "sequence", "layers", "output"});
  return s;
}

json encode(const HistoryEntry& h) {
  json j = {{"job", gateway::wire::encode(h.job)},
            {"clip_id", h.clip_id},
            {"request", encode_ref(h.request)},
            {"superseded", h.superseded}};
  put_extras(j, h.extras);
  return j;
}

HistoryEntry decode_history_entry(const json& j) {
  HistoryEntry h;
  try {
    h.job = gateway::wire::decode_job_record(at(j, "job"));
  } catch (const Error& e) {
    if (e.code() != Errc::kInvalidRequest) throw;
    corrupt(e.what());
  }
  h.clip_id = get<std::string>(j, "clip_id");
  h.request = decode_ref(at(j, "request"));
  h.superseded = get<bool>(j, "superseded");
  h.extras = take_extras(j, {"job", "clip_id", "request", "superseded"});
  return h;
}

json encode(const Project& p) {
  json scenes = json::array(), timelines = json::array(), skels = json::array(), history = json::array();
  for (const auto& s : p.scenes) scenes.push_back(encode(s));
  for (const auto& t : p.timelines) timelines.push_back(encode(t));
  for (const auto& s : p.skeletons) skels.push_back(encode(s));
  for (const auto& h : p.history) history.push_back(encode(h));
  json j = {{"schema", kSchema},
            {"schema_version", p.schema_version},
            {"id", p.id},
            {"name", p.name},
            {"scenes", scenes},
            {"timelines", timelines},
            {"skeletons", skels},
            {"style_overrides", encode(p.style_overrides)},
            {"history", history}};
  put_extras(j, p.extras);
  return j;
}

Project decode_project(const json& j) {
  if (!j.is_object()) corrupt("project must be an object");
  if (get<std::string>(j, "schema") != kSchema || get<int>(j, "schema_version") != kSchemaVersion) {
    fail(Errc::kSchemaVersionMismatch, "project schema version is not " + std::string(kSchema));
  }
  Project p;
  p.schema_version = kSchemaVersion;
  p.id = get<std::string>(j, "id");
  p.name = get<std::string>(j, "name");
  for (const auto& s : arr(j, "scenes")) p.scenes.push_back(decode_scene(s));
  for (const auto& t : arr(j, "timelines")) p.timelines.push_back(decode_timeline(t));
  for (const auto& s : arr(j, "skeletons")) p.skeletons.push_back(decode_skeleton_entry(s));
  p.style_overrides = decode_styles(at(j, "style_overrides"));
  for (const auto& h : arr(j, "history")) p.history.push_back(decode_history_entry(h));
  p.extras = take_extras(j, {"schema", "schema_version", "id", "name", "scenes", "timelines", "skeletons",
                             "style_overrides", "history"});
  return p;
}

}  // namespace codec

std::string to_json(const Project& p) { return codec::encode(p).dump(1) + "\n"; }

Project from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(Errc::kCorruptFile, std::string("project body is not JSON: ") + e.what());
  }
  try {
    return codec::decode_project(j);
  } catch (const Error& e) {
    if (e.code() == Errc::kSchemaError) fail(Errc::kCorruptFile, e.what());
    throw;
  }
}

std::string serialize(const Project& p) {
  const std::string body = to_json(p);
  return std::string(kSchema) + " sha256=" + sha256_hex(body) + "\n" + body;
}

Project deserialize(std::string_view file) {
  const auto nl = file.find('\n');
  if (nl == std::string_view::npos) fail(Errc::kCorruptFile, "project file has no header line");
  const std::string_view header = file.substr(0, nl);
  const std::string_view body = file.substr(nl + 1);
  const auto space = header.find(' ');
  const std::string_view schema = header.substr(0, space);
  if (schema != kSchema) {
    if (schema.rfind("previz-project/", 0) == 0) {
      fail(Errc::kSchemaVersionMismatch, "unsupported project schema '" + std::string(schema) + "'");
    }
    fail(Errc::kCorruptFile, "not a previz project file");
  }
  if (space == std::string_view::npos || header.substr(space + 1, 7) != "sha256=") {
    fail(Errc::kCorruptFile, "project header lacks a digest");
  }
  if (header.substr(space + 8) != sha256_hex(body)) fail(Errc::kCorruptFile, "project digest does not match its contents");
  return from_json(body);
}

void save_project(const Project& p, const std::string& path) {
  const std::string tmp = path + ".tmp";
  text::write_file(tmp, serialize(p));
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(Errc::kIoError, "cannot replace " + path);
}

Project load_project(const std::string& path) { return deserialize(text::read_file(path)); }

std::string asset_dir_for(const std::string& project_path) {
  std::filesystem::path p(project_path);
  return (p.parent_path() / (p.stem().string() + ".assets")).string();
}

}  // namespace previz::project
