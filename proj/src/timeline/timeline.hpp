// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "scene/scene.hpp"

namespace previz::timeline {

inline constexpr double kDefaultFps = 16.0;
inline constexpr double kMaxClipSeconds = 5.0;

enum class Easing { kLinear, kEaseInOut };

struct FovDeg {
  double value = 39.6;
  friend bool operator==(const FovDeg&, const FovDeg&) = default;
};

struct Intensity {
  double value = 1.0;
  friend bool operator==(const Intensity&, const Intensity&) = default;
};

using KeyValue = std::variant<Transform, FovDeg, Rgb, Intensity>;

// `easing` shapes the segment that starts at this keyframe.
struct Keyframe {
  double t = 0;
  KeyValue value;
  Easing easing = Easing::kLinear;

  friend bool operator==(const Keyframe&, const Keyframe&) = default;
};

struct PathSample {
  double t = 0;
  Vec3 translation;
  double yaw = 0;  // radians about +Y; 0 faces -Z

  friend bool operator==(const PathSample&, const PathSample&) = default;
};

enum class PathSource { kRecorded, kAuthored };

struct MotionPath {
  std::string entity_id;
  std::vector<PathSample> samples;
  PathSource source = PathSource::kAuthored;

  friend bool operator==(const MotionPath&, const MotionPath&) = default;

  double start() const { return samples.front().t; }
  double end() const { return samples.back().t; }
};

enum class TrackKind { kCamera, kElementAnimation, kFixedElement };

// Which property of the target a track's keyframes drive.
enum class Channel { kTransform, kFov, kColor, kIntensity };

struct Track {
  std::string id;
  TrackKind kind = TrackKind::kCamera;
  std::string target_id;
  Channel channel = Channel::kTransform;
  std::vector<Keyframe> keyframes;  // strictly increasing t
  std::vector<MotionPath> paths;    // element-animation only, disjoint in time
  Extras extras;

  friend bool operator==(const Track&, const Track&) = default;
};

enum class ClipStatus { kDraft, kRendered, kSubmitted, kGenerated, kFailed };

struct Clip {
  std::string id;
  std::string camera_id;
  double t_in = 0;
  double t_out = 1;
  double fps = kDefaultFps;
  std::optional<std::string> attached_style_image;
  std::optional<std::string> attached_video_result;
  ClipStatus status = ClipStatus::kDraft;
  Extras extras;

  friend bool operator==(const Clip&, const Clip&) = default;

  int frame_count() const;
};

struct Timeline {
  std::string id;
  std::string scene_id;
  std::vector<Track> tracks;
  std::vector<Clip> clips;
  Extras extras;

  friend bool operator==(const Timeline&, const Timeline&) = default;

  const Track* find_track(std::string_view id) const;
  const Clip* find_clip(std::string_view id) const;
};

// Track editing.
Track add_keyframe(const Track& track, const Keyframe& kf);
KeyValue sample_track(const Track& track, double t);
bool value_matches(Channel channel, const KeyValue& value);

std::optional<PathSample> sample_path(const MotionPath& path, double t);

// Keyboard capture. Keys: W/S move along -Z/+Z, A/D along -X/+X, Q/E along
// -Y/+Y, in world axes. Unknown keys are rejected.
struct InputEvent {
  double t = 0;
  char key = 'W';
  bool down = true;

  friend bool operator==(const InputEvent&, const InputEvent&) = default;
};

struct RecordOptions {
  std::string entity_id;
  Vec3 start;
  double start_yaw = 0;
  double sample_hz = 30.0;
  double max_samples_per_second = 10.0;
  double tolerance_m = 0.01;
  double yaw_smoothing_s = 0.2;
};

// Dense fixed-rate integration of the key state, before simplification.
std::vector<PathSample> integrate_input(const std::vector<InputEvent>& events, double speed,
                                        const RecordOptions& options);
MotionPath record_motion_path(const std::vector<InputEvent>& events, double speed,
                              const RecordOptions& options = {});

// Timeline editing; each returns a new value and preserves per-camera clip
// non-overlap.
Timeline add_track(const Timeline& tl, const scene::Scene& scene, Track track);
Timeline add_track_keyframe(const Timeline& tl, std::string_view track_id, const Keyframe& kf);
Timeline add_motion_path(const Timeline& tl, std::string_view track_id, MotionPath path);
Timeline add_clip(const Timeline& tl, const scene::Scene& scene, Clip clip);
Timeline remove_clip(const Timeline& tl, std::string_view clip_id);
Timeline replace_clip(const Timeline& tl, const scene::Scene& scene, const Clip& clip);

void validate_track(const Track& track, const scene::Scene& scene);
void validate_clip(const Clip& clip, const scene::Scene& scene);
void validate_timeline(const Timeline& tl, const scene::Scene& scene);

struct EntityState {
  std::string id;
  Transform transform;
  Rgb color;
  friend bool operator==(const EntityState&, const EntityState&) = default;
};

struct LightState {
  std::string id;
  Rgb color;
  double intensity = 0;
  friend bool operator==(const LightState&, const LightState&) = default;
};

// Everything needed to render one frame.
struct FrameState {
  int index = 0;
  double t = 0;
  std::string clip_id;
  scene::Camera camera;  // pose and fov at t
  std::vector<EntityState> entities;
  std::vector<LightState> lights;
  friend bool operator==(const FrameState&, const FrameState&) = default;
};

struct FramePlan {
  double t0 = 0;
  double t1 = 0;
  double fps = kDefaultFps;
  std::vector<FrameState> frames;
  friend bool operator==(const FramePlan&, const FramePlan&) = default;
};

// State of every element at time t with the given camera.
FrameState evaluate_at(const Timeline& tl, const scene::Scene& scene, const scene::Camera& camera,
                       double t);

FramePlan compose_sequence(const Timeline& tl, const scene::Scene& scene, double t0, double t1,
                           double fps);

// Diagnostic dump, one row per frame.
std::string frame_plan_table(const FramePlan& plan);

}  // namespace previz::timeline
