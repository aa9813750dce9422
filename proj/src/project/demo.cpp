// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

#include "project/demo.hpp"

#include <cmath>
#include <numbers>

namespace previz::project {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

Transform at(Vec3 p, double yaw_deg = 0) { return {p, Quat::from_yaw(yaw_deg * kDeg), {1, 1, 1}}; }

// Camera pose at `eye` looking at `target` (cameras look down -Z).
Transform look_at(Vec3 eye, Vec3 target) {
  const Vec3 d = target - eye;
  const double yaw = std::atan2(-d.x, -d.z);
  const double pitch = std::atan2(d.y, std::hypot(d.x, d.z));
  return {eye, Quat::from_yaw(yaw) * Quat::from_axis_angle({1, 0, 0}, pitch), {1, 1, 1}};
}

void add_box(scene::MeshGeometry& m, Vec3 lo, Vec3 hi) {
  const auto base = static_cast<std::uint32_t>(m.positions.size());
  for (int i = 0; i < 8; ++i) {
    m.positions.push_back({(i & 1) ? hi.x : lo.x, (i & 2) ? hi.y : lo.y, (i & 4) ? hi.z : lo.z});
  }
  // Outward winding, counter-clockwise seen from outside.
  static constexpr std::uint32_t kFaces[12][3] = {{0, 2, 3}, {0, 3, 1}, {4, 5, 7}, {4, 7, 6},
                                                  {0, 1, 5}, {0, 5, 4}, {2, 6, 7}, {2, 7, 3},
                                                  {0, 4, 6}, {0, 6, 2}, {1, 3, 7}, {1, 7, 5}};
  for (const auto& f : kFaces) m.triangles.push_back({base + f[0], base + f[1], base + f[2]});
}

// Standing figure with feet at y = 0, matching humanoid_rig().
scene::MeshGeometry figure() {
  scene::MeshGeometry m;
  add_box(m, {-0.16, 0.0, -0.1}, {0.16, 0.88, 0.1});    // legs
  add_box(m, {-0.22, 0.88, -0.13}, {0.22, 1.48, 0.13}); // torso
  add_box(m, {-0.11, 1.5, -0.11}, {0.11, 1.75, 0.11});  // head
  return m;
}

scene::SceneEntity prop(std::string id, std::string name, scene::ProxyGeometry g, Transform t, Rgb color,
                        scene::EntityRole role = scene::EntityRole::kProp) {
  scene::SceneEntity e;
  e.id = std::move(id);
  e.name = std::move(name);
  e.role = role;
  e.geometry = std::move(g);
  e.transform = t;
  e.base_color = color;
  return e;
}

scene::SceneEntity character(std::string_view id, std::string name, Transform t, Rgb color) {
  auto e = prop(std::string(id), std::move(name), figure(), t, color, scene::EntityRole::kCharacter);
  e.movable = true;
  e.character_profile_ref = std::string(id);
  e.rig = scene::humanoid_rig(1.75);
  return e;
}

scene::Scene build_room() {
  scene::Scene s;
  s.id = std::string(demo::kSceneId);
  s.backdrop_color = {0.02, 0.02, 0.04};
  auto add = [&s](scene::SceneEntity e) { s = scene::add_entity(s, std::move(e)).first; };
  add(prop("floor", "Floor", scene::PlaneGeometry{9, 9}, at({0, 0, -1.5}), {0.22, 0.2, 0.26},
           scene::EntityRole::kSetPiece));
  add(prop("back_wall", "Back wall", scene::BoxGeometry{{9, 3.2, 0.12}}, at({0, 1.6, -4.2}), {0.28, 0.26, 0.36},
           scene::EntityRole::kSetPiece));
  add(prop("side_wall", "Side wall", scene::BoxGeometry{{0.12, 3.2, 6}}, at({2.6, 1.6, -1.5}),
           {0.24, 0.22, 0.32}, scene::EntityRole::kSetPiece));
  add(prop("desk", "Desk", scene::BoxGeometry{{1.5, 0.06, 0.75}}, at({0.9, 0.74, -2.75}), {0.35, 0.24, 0.16}));
  add(prop("desk_base", "Desk base", scene::BoxGeometry{{1.3, 0.7, 0.6}}, at({0.9, 0.36, -2.8}),
           {0.2, 0.14, 0.1}));
  add(prop("computer", "Computer", scene::BoxGeometry{{0.62, 0.4, 0.05}}, at({0.9, 1.02, -2.98}),
           {0.55, 0.95, 1.0}));
  add(prop("chair", "Chair", scene::BoxGeometry{{0.5, 0.48, 0.5}}, at({1.75, 0.24, -2.2}), {0.12, 0.12, 0.14}));
  add(character(demo::kHacker, "The Hacker", at({0.9, 0, -2.05}), {0.42, 0.2, 0.55}));
  add(character(demo::kConspirator, "The Conspirator", at({-1.9, 0, -3.3}, -90), {0.18, 0.2, 0.3}));

  s = scene::add_light(s, {"ambient", scene::LightKind::kAmbient, {0.35, 0.35, 0.55}, 0.35, {}, {}});
  s = scene::add_light(s, {"screen_glow", scene::LightKind::kPoint, {0.45, 0.85, 1.0}, 2.6,
                           at({0.9, 1.1, -2.6}), {}});
  s = scene::add_light(s, {"window", scene::LightKind::kDirectional, {0.6, 0.45, 0.9}, 0.5,
                           look_at({-2, 3, 1}, {0, 0, -2}), {}});

  auto ots = scene::make_camera(std::string(demo::kCamOts), scene::CameraPreset::kNormal,
                                look_at({2.3, 1.95, 0.1}, {-0.6, 0.9, -3.2}));
  ots.label = "Over the shoulder";
  s = scene::add_camera(s, ots);
  auto two = scene::make_camera(std::string(demo::kCamTwo), scene::CameraPreset::kWide,
                                look_at({-1.2, 1.7, 1.4}, {0.2, 0.95, -2.4}));
  two.label = "Two shot";
  s = scene::add_camera(s, two);
  return s;
}

// Conspirator crosses from the doorway towards the hacker with W/A/S/D.
timeline::MotionPath record_walk() {
  using timeline::InputEvent;
  const std::vector<InputEvent> events = {
      {0.0, 'D', true}, {0.5, 'S', true}, {1.4, 'S', false}, {2.1, 'D', false}, {3.0, 'D', true},
      {3.4, 'D', false}};
  timeline::RecordOptions opt;
  opt.entity_id = std::string(demo::kConspirator);
  opt.start = {-1.9, 0, -3.3};
  opt.start_yaw = -90 * kDeg;
  return timeline::record_motion_path(events, 1.1, opt);
}

timeline::Timeline build_timeline(const scene::Scene& s) {
  timeline::Timeline tl;
  tl.id = std::string(demo::kTimelineId);
  tl.scene_id = s.id;

  timeline::Track walk;
  walk.id = "conspirator_walk";
  walk.kind = timeline::TrackKind::kElementAnimation;
  walk.target_id = std::string(demo::kConspirator);
  walk.channel = timeline::Channel::kTransform;
  tl = timeline::add_track(tl, s, walk);
  tl = timeline::add_motion_path(tl, walk.id, record_walk());

  // The over-the-shoulder camera follows the conspirator in.
  timeline::Track follow;
  follow.id = "ots_follow";
  follow.kind = timeline::TrackKind::kCamera;
  follow.target_id = std::string(demo::kCamOts);
  follow.channel = timeline::Channel::kTransform;
  tl = timeline::add_track(tl, s, follow);
  const std::pair<double, Transform> keys[] = {
      {0.0, look_at({2.3, 1.95, 0.1}, {-0.6, 0.9, -3.2})},
      {1.0, look_at({2.25, 1.95, -0.1}, {-0.2, 0.9, -3.0})},
      {2.0, look_at({2.2, 1.9, -0.3}, {0.2, 0.95, -2.8})},
      {4.0, look_at({2.1, 1.9, -0.4}, {0.4, 1.0, -2.7})}};
  for (const auto& [t, pose] : keys) {
    tl = timeline::add_track_keyframe(tl, follow.id, {t, pose, timeline::Easing::kEaseInOut});
  }

  timeline::Clip c1;
  c1.id = std::string(demo::kClipOts);
  c1.camera_id = std::string(demo::kCamOts);
  c1.t_in = 0;
  c1.t_out = 2;
  c1.fps = 16;
  tl = timeline::add_clip(tl, s, c1);
  timeline::Clip c2 = c1;
  c2.id = std::string(demo::kClipTwo);
  c2.camera_id = std::string(demo::kCamTwo);
  c2.t_in = 2;
  c2.t_out = 4;
  tl = timeline::add_clip(tl, s, c2);
  return tl;
}

skeleton::PersonPose pose_at(std::int64_t id, double cx, double foot_y, double height, double facing,
                             double gesture, double nod) {
  const auto rig = scene::humanoid_rig(1.75);
  const double s = height / 1.75;
  skeleton::PersonPose p;
  p.person_id = id;
  for (int j = 0; j < body::kJointCount; ++j) {
    const Vec3& r = rig.joints[j];
    // Seen from the side-front: facing mirrors x and compresses it.
    double x = cx + facing * r.x * s * 0.8;
    double y = foot_y - r.y * s;
    if (j == body::kRightWrist || j == body::kRightElbow) {
      const double lift = (j == body::kRightWrist ? 0.22 : 0.1) * gesture * s;
      y -= lift;
      x += facing * lift * 0.6;
    }
    if (j == body::kNose || j == body::kRightEye || j == body::kLeftEye || j == body::kRightEar ||
        j == body::kLeftEar) {
      y += nod * 0.02 * s;
    }
    p.joints[j] = {x, y, 0.9};
  }
  return p;
}

}  // namespace

skeleton::SkeletonSequence demo_discussion(int frames) {
  skeleton::SkeletonSequence seq;
  seq.fps = 16;
  seq.source_width = 1280;
  seq.source_height = 720;
  for (int f = 0; f < frames; ++f) {
    const double t = f / seq.fps;
    skeleton::SkeletonFrame frame;
    // Person 0 sits still and nods; person 1 steps closer and gestures.
    frame.persons.push_back(pose_at(0, 0.66, 0.9, 0.62, -1, 0.15 * std::sin(2.1 * t), std::sin(3.3 * t)));
    frame.persons.push_back(pose_at(1, 0.3 + 0.04 * t, 0.92, 0.66, 1, 0.5 + 0.5 * std::sin(4.0 * t), 0));
    seq.frames.push_back(std::move(frame));
  }
  return seq;
}

style::PromptFields demo_prompt_fields() {
  style::PromptFields f;
  f.style = style::StyleTag::kCinematic;
  f.mood_tone = "tense";
  f.genre = "thriller";
  f.background_description = "a dimly lit room with a glowing computer screen and subtle red warnings";
  f.characters = {{std::string(demo::kHacker), "typing fast, face lit by the monitor"},
                  {std::string(demo::kConspirator), "approaching with urgency"}};
  f.motion = "the conspirator walks towards the hacker";
  f.seed = demo::kSeed;
  return f;
}

Project build_demo(AssetStore& store) {
  Project p;
  p.id = std::string(demo::kProjectId);
  p.name = "Hacker Scene";
  p.scenes.push_back(build_room());
  p.timelines.push_back(build_timeline(p.scenes[0]));

  // Imported discussion footage, remixed so the conspirator layer follows
  // the recorded walk as seen through the over-the-shoulder camera.
  const auto seq = demo_discussion();
  SkeletonEntry entry;
  entry.id = std::string(demo::kSkeletonId);
  entry.name = "Discussion reference";
  entry.sequence = store.put_text(skeleton::export_skeleton_sequence(seq), media::kSkeleton);
  entry.layers = skeleton::split_layers(seq);

  const auto& scene = p.scenes[0];
  const auto& tl = p.timelines[0];
  skeleton::BlockingView view;
  view.camera = *scene.find_camera(demo::kCamOts);
  view.camera_tracks = {*tl.find_track("ots_follow")};
  const auto& walk = tl.find_track("conspirator_walk")->paths.at(0);
  for (auto& layer : entry.layers) {
    if (layer.person_id == 1) {
      layer = skeleton::transform_layer(layer, {0.05, 0}, 0.9, {0.3, 0.92}).layer;
      layer = skeleton::blend_with_blocking(layer, walk, view, seq.fps);
    }
  }
  const auto remixed = skeleton::recomposite(entry.layers, seq.fps, 2.0);
  entry.output = store.put_text(skeleton::export_skeleton_sequence(remixed), media::kSkeleton);
  p.skeletons.push_back(std::move(entry));
  return p;
}

}  // namespace previz::project
