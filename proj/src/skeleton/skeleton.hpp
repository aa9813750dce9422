// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scene/scene.hpp"
#include "skeleton/pose.hpp"
#include "timeline/timeline.hpp"

namespace previz::skeleton {

inline constexpr std::string_view kSchema = "previz-skel/1";
// Max hip displacement (unit square) for carrying an identity across frames.
inline constexpr double kIdentityGate = 0.1;

struct Point2 {
  double x = 0;
  double y = 0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

struct SkeletonSequence {
  double fps = 16.0;
  // Time of frame 0 relative to the start of the sequence.
  double time_offset = 0.0;
  int source_width = 0;
  int source_height = 0;
  std::vector<SkeletonFrame> frames;

  friend bool operator==(const SkeletonSequence&, const SkeletonSequence&) = default;

  double frame_time(std::size_t i) const { return time_offset + static_cast<double>(i) / fps; }
  double duration() const { return time_offset + static_cast<double>(frames.size()) / fps; }
  // Distinct person ids in ascending order.
  std::vector<std::int64_t> person_ids() const;
};

struct ImportResult {
  SkeletonSequence sequence;
  int warnings = 0;  // clamped joints
};

ImportResult import_skeleton_sequence(std::string_view document);
std::string export_skeleton_sequence(const SkeletonSequence& seq);

// Fills missing person ids by greedy nearest-hip matching against the last
// known hip of every identity, gated at kIdentityGate.
void assign_person_ids(SkeletonSequence& seq);

// Hip midpoint, falling back to one hip, the neck, then the visible mean.
std::optional<Point2> root_point(const PersonPose& pose);

SkeletonSequence crop(const SkeletonSequence& seq, double t0, double t1);

// p -> anchor + scale * (p - anchor) + translate
struct Placement {
  Point2 translate;
  double scale = 1.0;
  Point2 anchor;

  friend bool operator==(const Placement&, const Placement&) = default;
  Point2 apply(Point2 p) const {
    return {anchor.x + scale * (p.x - anchor.x) + translate.x,
            anchor.y + scale * (p.y - anchor.y) + translate.y};
  }
};

// One person's track. Coordinates may leave the unit square after a
// transform; they are clamped when recomposited.
struct SkeletonLayer {
  std::int64_t person_id = 0;
  double fps = 16.0;
  double start_time = 0.0;  // time of frame 0
  int source_width = 0;
  int source_height = 0;
  std::vector<std::optional<PersonPose>> frames;
  Placement placement;  // accumulated transform, for display

  friend bool operator==(const SkeletonLayer&, const SkeletonLayer&) = default;
};

std::vector<SkeletonLayer> split_layers(const SkeletonSequence& seq);

struct FlaggedJoint {
  std::size_t frame = 0;
  int joint = 0;
  friend bool operator==(const FlaggedJoint&, const FlaggedJoint&) = default;
};

struct TransformResult {
  SkeletonLayer layer;
  // Visible joints that now lie outside the unit square.
  std::vector<FlaggedJoint> flagged;
};

TransformResult transform_layer(const SkeletonLayer& layer, Point2 translate, double scale,
                                Point2 anchor);

// Mean root point of the layer over all frames where it is defined.
std::optional<Point2> layer_root_centroid(const SkeletonLayer& layer);

// Output frame k sits at base + k/fps, base being the earliest layer start;
// round(duration * fps) frames are produced. Persons are ordered by id.
SkeletonSequence recomposite(std::span<const SkeletonLayer> layers, double fps, double duration);

struct BlockingView {
  scene::Camera camera;
  // Camera tracks (transform and/or fov channel) animating `camera`.
  std::vector<timeline::Track> camera_tracks;
  int width = 512;
  int height = 288;
  // Entity-space point that the skeleton root is pinned to.
  Vec3 root_offset{0, 0.95, 0};
};

// Pins the layer's root to the projected entity position along the path and
// scales limbs by reference_depth / frame_depth about that root.
SkeletonLayer blend_with_blocking(const SkeletonLayer& layer, const timeline::MotionPath& path,
                                  const BlockingView& view, double fps);

// Camera of `view` posed at time t.
scene::Camera camera_at(const BlockingView& view, double t);

// Projected path position and depth scale per output frame, for inspection.
struct BlockingSample {
  double t = 0;
  std::optional<Point2> root;  // unset when the point is behind the camera
  double scale = 1.0;
};
std::vector<BlockingSample> blocking_samples(const SkeletonLayer& layer,
                                             const timeline::MotionPath& path,
                                             const BlockingView& view, double fps);

// Nearest-frame resampling to a new rate.
SkeletonLayer resample_layer(const SkeletonLayer& layer, double fps);

}  // namespace previz::skeleton
