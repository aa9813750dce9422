// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <vector>

#include "scene/scene.hpp"
#include "support/check.hpp"
#include "timeline/timeline.hpp"

using namespace previz;
using namespace previz::timeline;
using previz::testing::Gen;

namespace {

scene::Scene small_scene() {
  scene::Scene s;
  s.id = "s";
  s.cameras.push_back(scene::make_camera("cam", scene::CameraPreset::kNormal, {}));
  s.cameras.push_back(scene::make_camera("cam2", scene::CameraPreset::kWide, {}));
  s.lights.push_back({"amb", scene::LightKind::kAmbient, {1, 1, 1}, 1.0, {}, {}});
  scene::SceneEntity walker;
  walker.id = "walker";
  walker.role = scene::EntityRole::kCharacter;
  walker.movable = true;
  s = scene::add_entity(s, walker).first;
  return s;
}

Transform at(Vec3 p) { return {p, {}, {1, 1, 1}}; }

Track camera_track() {
  Track t;
  t.id = "ct";
  t.kind = TrackKind::kCamera;
  t.target_id = "cam";
  return t;
}

// Position at time t of held-key motion, integrated exactly from the events.
Vec3 exact_position(const std::vector<InputEvent>& events, double speed, double t) {
  Vec3 pos;
  bool held[256] = {};
  double prev = events.front().t;
  auto dir_of = [&] {
    Vec3 d;
    if (held['W']) d += {0, 0, -1};
    if (held['S']) d += {0, 0, 1};
    if (held['A']) d += {-1, 0, 0};
    if (held['D']) d += {1, 0, 0};
    if (held['Q']) d += {0, -1, 0};
    if (held['E']) d += {0, 1, 0};
    return normalized(d);
  };
  for (const auto& e : events) {
    const double until = std::min(e.t, t);
    if (until > prev) pos += dir_of() * (speed * (until - prev));
    prev = std::max(prev, until);
    if (e.t > t) break;
    held[static_cast<unsigned char>(e.key)] = e.down;
  }
  if (t > prev) pos += dir_of() * (speed * (t - prev));
  return pos;
}

std::vector<InputEvent> square_walk() {
  return {{0, 'W', true}, {1, 'W', false}, {1, 'D', true}, {2, 'D', false},
          {2, 'S', true}, {3, 'S', false}, {3, 'A', true}, {4, 'A', false}};
}

}  // namespace

TEST_CASE("add_keyframe ordering and errors") {
  Track t = camera_track();
  t = add_keyframe(t, {0, at({0, 0, 0})});
  t = add_keyframe(t, {2, at({2, 0, 0})});
  REQUIRE(t.keyframes.size() == 2);
  t = add_keyframe(t, {1, at({1, 0, 0})});
  CHECK(t.keyframes[0].t == 0);
  CHECK(t.keyframes[1].t == 1);
  CHECK(t.keyframes[2].t == 2);
  CHECK_ERRC(add_keyframe(t, {0, at({5, 0, 0})}), Errc::kDuplicateTime);
  CHECK_ERRC(add_keyframe(t, {3, FovDeg{30}}), Errc::kTypeMismatch);
}

TEST_CASE("add_keyframe keeps times sorted for random insertion orders") {
  Gen g(17);
  for (int round = 0; round < 50; ++round) {
    Track t = camera_track();
    std::vector<double> times;
    for (int i = 0; i < 20; ++i) {
      const double tt = g.integer(0, 400) * 0.025;
      const bool dup = std::find(times.begin(), times.end(), tt) != times.end();
      if (dup) {
        CHECK_ERRC(add_keyframe(t, {tt, at({})}), Errc::kDuplicateTime);
      } else {
        t = add_keyframe(t, {tt, at({tt, 0, 0})});
        times.push_back(tt);
      }
    }
    for (std::size_t i = 1; i < t.keyframes.size(); ++i) CHECK(t.keyframes[i - 1].t < t.keyframes[i].t);
  }
}

TEST_CASE("sample_track interpolation") {
  Track t = camera_track();
  t = add_keyframe(t, {0, at({0, 0, 0})});
  t = add_keyframe(t, {2, at({2, 0, 0})});
  CHECK(std::get<Transform>(sample_track(t, 1)).translation.x == doctest::Approx(1));
  CHECK(std::get<Transform>(sample_track(t, 5)) == std::get<Transform>(t.keyframes[1].value));
  CHECK(std::get<Transform>(sample_track(t, -1)) == std::get<Transform>(t.keyframes[0].value));
  CHECK_ERRC(sample_track(camera_track(), 0), Errc::kEmptyTrack);
}

TEST_CASE("sample_track rotation matches the axis-angle oracle") {
  Gen g(23);
  for (int i = 0; i < 200; ++i) {
    const Vec3 axis = normalized(Vec3{g.uniform(-1, 1), g.uniform(-1, 1), g.uniform(-1, 1)} + Vec3{0, 1e-3, 0});
    const double total = g.uniform(0.01, 3.1);
    const double u = g.uniform(0, 1);
    Track t = camera_track();
    t = add_keyframe(t, {0, Transform{{}, Quat{}, {1, 1, 1}}});
    t = add_keyframe(t, {1, Transform{{}, Quat::from_axis_angle(axis, total), {1, 1, 1}}});
    const Quat got = std::get<Transform>(sample_track(t, u)).rotation;
    const Quat want = Quat::from_axis_angle(axis, total * u);
    CHECK(rad_to_deg(angle_between(got, want)) <= 1e-6);
  }
  // 0 to 90 degrees about Y, halfway.
  Track t = camera_track();
  t = add_keyframe(t, {0, Transform{}});
  t = add_keyframe(t, {1, Transform{{}, Quat::from_yaw(deg_to_rad(90)), {1, 1, 1}}});
  const Quat half = std::get<Transform>(sample_track(t, 0.5)).rotation;
  CHECK(rad_to_deg(angle_between(half, Quat{})) == doctest::Approx(45).epsilon(1e-9));
}

TEST_CASE("slerp takes the +Y arc on an exact 180 degree tie") {
  const Quat a{};
  const Quat b = Quat::from_axis_angle({1, 0, 0}, std::numbers::pi);
  const Quat mid = slerp(a, b, 0.5);
  CHECK(mid.is_unit());
  CHECK(rad_to_deg(angle_between(mid, a)) == doctest::Approx(90));
}

TEST_CASE("ease-in-out applies smoothstep") {
  Track t;
  t.id = "fov";
  t.kind = TrackKind::kCamera;
  t.target_id = "cam";
  t.channel = Channel::kFov;
  t = add_keyframe(t, {0, FovDeg{20}, Easing::kEaseInOut});
  t = add_keyframe(t, {1, FovDeg{60}});
  for (double u : {0.1, 0.25, 0.5, 0.8}) {
    const double s = u * u * (3 - 2 * u);
    CHECK(std::get<FovDeg>(sample_track(t, u)).value == doctest::Approx(20 + 40 * s));
  }
}

TEST_CASE("sample_track is continuous for linear easing") {
  Gen g(29);
  for (int round = 0; round < 30; ++round) {
    Track t = camera_track();
    for (int k = 0; k < 5; ++k) {
      t = add_keyframe(t, {k * 1.0,
                           Transform{{g.uniform(-3, 3), g.uniform(-3, 3), g.uniform(-3, 3)},
                                     Quat::from_axis_angle({0, 1, 0}, g.uniform(-3, 3)),
                                     {1, 1, 1}}});
    }
    for (int i = 0; i < 50; ++i) {
      const double tt = g.uniform(0, 4);
      const auto a = std::get<Transform>(sample_track(t, tt));
      const auto b = std::get<Transform>(sample_track(t, tt + 1e-7));
      CHECK(length(a.translation - b.translation) < 1e-5);
      CHECK(angle_between(a.rotation, b.rotation) < 1e-5);
    }
  }
}

TEST_CASE("record_motion_path constant velocity") {
  const std::vector<InputEvent> ev = {{0, 'W', true}, {2, 'W', false}};
  const MotionPath p = record_motion_path(ev, 1.5);
  const Vec3 end = p.samples.back().translation;
  CHECK(std::abs(end.x) <= 1e-3);
  CHECK(std::abs(end.y) <= 1e-3);
  CHECK(std::abs(end.z + 3) <= 1e-3);
  CHECK(p.source == PathSource::kRecorded);
  CHECK_ERRC(record_motion_path({}, 1.5), Errc::kEmptyRecording);
}

TEST_CASE("square walk closes on itself against the dense oracle") {
  const auto ev = square_walk();
  const double speed = 1.0;
  const auto dense = integrate_input(ev, speed, {});
  for (const auto& s : dense) {
    CHECK(length(s.translation - exact_position(ev, speed, s.t)) <= 1e-9);
  }
  const MotionPath p = record_motion_path(ev, speed);
  CHECK(length(p.samples.back().translation - p.samples.front().translation) <= 0.02);
}

TEST_CASE("simplified recordings stay within 1 cm of the dense integration") {
  Gen g(31);
  const char keys[] = {'W', 'A', 'S', 'D', 'Q', 'E'};
  for (int round = 0; round < 40; ++round) {
    std::vector<InputEvent> ev;
    double t = 0;
    bool held[6] = {};
    ev.push_back({0, 'W', true});
    held[0] = true;
    const int n = g.integer(2, 12);
    for (int i = 0; i < n; ++i) {
      t += g.uniform(0.05, 1.2);
      const int k = g.integer(0, 5);
      held[k] = !held[k];
      ev.push_back({t, keys[k], held[k]});
    }
    const double speed = g.uniform(0.3, 3);
    const auto dense = integrate_input(ev, speed, {});
    const MotionPath p = record_motion_path(ev, speed);
    REQUIRE(p.samples.size() >= 2);
    for (std::size_t i = 1; i < p.samples.size(); ++i) CHECK(p.samples[i - 1].t < p.samples[i].t);
    double worst = 0;
    for (const auto& d : dense) {
      worst = std::max(worst, length(sample_path(p, d.t)->translation - d.translation));
    }
    CHECK(worst <= 0.01 + 1e-12);
    for (const auto& s : p.samples) {
      CHECK(length(s.translation - exact_position(ev, speed, s.t)) <= 0.01 + 1e-12);
    }
  }
}

TEST_CASE("recorded yaw follows the direction of travel") {
  const std::vector<InputEvent> ev = {{0, 'D', true}, {3, 'D', false}};
  const MotionPath p = record_motion_path(ev, 1.0);
  // Moving +X: facing vector (1,0,0) gives yaw atan2(-1, 0) = -90 degrees.
  CHECK(rad_to_deg(p.samples.back().yaw) == doctest::Approx(-90).epsilon(1e-3));
}

TEST_CASE("clips") {
  const auto s = small_scene();
  Timeline tl;
  tl.id = "tl";
  tl.scene_id = s.id;
  Clip c{"c1", "cam", 0, 2};
  CHECK(c.frame_count() == 32);
  tl = add_clip(tl, s, c);
  CHECK_ERRC(add_clip(tl, s, Clip{"c2", "cam", 1.9, 3}), Errc::kClipOverlap);
  CHECK_ERRC(add_clip(tl, s, Clip{"c3", "cam", 2, 7.5}), Errc::kClipTooLong);
  CHECK_ERRC(add_clip(tl, s, Clip{"c4", "nope", 2, 3}), Errc::kUnknownId);
  tl = add_clip(tl, s, Clip{"c5", "cam", 2, 3});
  CHECK(tl.clips.size() == 2);
}

TEST_CASE("clip non-overlap survives random edit sequences") {
  const auto s = small_scene();
  Gen g(37);
  Timeline tl;
  tl.id = "tl";
  for (int i = 0; i < 300; ++i) {
    const double a = g.integer(0, 80) * 0.125;
    Clip c{"c" + std::to_string(g.integer(0, 10)), g.coin() ? "cam" : "cam2", a,
           a + g.integer(1, 24) * 0.125};
    try {
      if (tl.find_clip(c.id)) {
        tl = g.coin() ? replace_clip(tl, s, c) : remove_clip(tl, c.id);
      } else {
        tl = add_clip(tl, s, c);
      }
    } catch (const Error&) {
    }
    for (const auto& x : tl.clips) {
      for (const auto& y : tl.clips) {
        if (&x == &y || x.camera_id != y.camera_id) continue;
        CHECK_FALSE((x.t_in < y.t_out - 1e-9 && y.t_in < x.t_out - 1e-9));
      }
    }
  }
}

TEST_CASE("compose_sequence") {
  const auto s = small_scene();
  Timeline tl;
  tl.id = "tl";
  tl.scene_id = s.id;
  tl = add_clip(tl, s, Clip{"c1", "cam", 0, 2});
  tl = add_clip(tl, s, Clip{"c2", "cam2", 2, 4});

  SUBCASE("frame count") {
    CHECK(compose_sequence(tl, s, 0, 2, 16).frames.size() == 32);
    const auto plan = compose_sequence(tl, s, 1, 3, 16);
    CHECK(plan.frames.front().clip_id == "c1");
    CHECK(plan.frames.back().clip_id == "c2");
    CHECK(plan.frames.back().camera.id == "cam2");
  }
  SUBCASE("overlap between cameras") {
    Timeline bad = tl;
    bad.clips[1].t_in = 1.9;
    CHECK_ERRC(compose_sequence(bad, s, 0, 4, 16), Errc::kCameraOverlap);
  }
  SUBCASE("overlap on one camera") {
    Timeline bad = tl;
    bad.clips[1].t_in = 1.9;
    bad.clips[1].camera_id = "cam";
    CHECK_ERRC(compose_sequence(bad, s, 0, 4, 16), Errc::kCameraOverlap);
  }
  SUBCASE("gap") {
    Timeline bad = tl;
    bad.clips[1].t_in = 2.5;
    CHECK_ERRC(compose_sequence(bad, s, 0, 4, 16), Errc::kCameraGap);
  }
  SUBCASE("deterministic") {
    CHECK(compose_sequence(tl, s, 0, 4, 16) == compose_sequence(tl, s, 0, 4, 16));
  }
}

TEST_CASE("motion paths override keyframes which override the static pose") {
  auto s = small_scene();
  Timeline tl;
  tl.id = "tl";
  tl = add_clip(tl, s, Clip{"c1", "cam", 0, 4});
  Track anim;
  anim.id = "walk";
  anim.kind = TrackKind::kElementAnimation;
  anim.target_id = "walker";
  tl = add_track(tl, s, anim);
  tl = add_track_keyframe(tl, "walk", {0, at({5, 0, 0})});
  tl = add_track_keyframe(tl, "walk", {4, at({5, 0, 4})});
  MotionPath path;
  path.entity_id = "walker";
  path.samples = {{1, {0, 0, 0}, 0}, {2, {0, 0, -2}, 0}};
  tl = add_motion_path(tl, "walk", path);

  const auto plan = compose_sequence(tl, s, 0, 4, 4);
  auto pos = [&](int k) { return plan.frames[k].entities[0].transform.translation; };
  CHECK(pos(0) == Vec3{5, 0, 0});           // keyframes before the path starts
  CHECK(pos(6) == Vec3{0, 0, -1});          // t = 1.5, on the path
  CHECK(pos(12) == Vec3{0, 0, -2});         // t = 3, path end holds
}
