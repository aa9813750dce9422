// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "common/image.hpp"
#include "scene/scene.hpp"
#include "skeleton/pose.hpp"
#include "timeline/timeline.hpp"

namespace previz::raster {

inline constexpr int kMinSize = 16;
inline constexpr int kMaxSize = 4096;
inline constexpr double kDefaultExpandPx = 15.0;
inline constexpr double kDefaultBlurSigma = 4.5;
inline constexpr double kPoseConfidenceThreshold = 0.3;

// Sub-pixel precision of snapped vertex positions (24.8 fixed point).
inline constexpr int kSubpixelBits = 8;
inline constexpr std::int64_t kSubpixelScale = 1 << kSubpixelBits;

struct RenderSize {
  int width = 512;
  int height = 288;
};

struct LegendEntry {
  std::uint16_t raster_id = 0;
  std::string entity_id;
  // Profile ref for characters that have one, otherwise the entity id.
  std::string character;
  bool is_character = false;

  friend bool operator==(const LegendEntry&, const LegendEntry&) = default;
};

struct ConditioningFrame {
  int width = 0;
  int height = 0;
  RgbImage color;
  GrayImage depth;   // 255 nearest, 0 at/beyond far or empty
  Gray16Image id;    // raster ids, 0 = background
  std::optional<RgbImage> pose;
  std::vector<LegendEntry> legend;

  friend bool operator==(const ConditioningFrame&, const ConditioningFrame&) = default;

  const LegendEntry* find(std::uint16_t raster_id) const;
};

// Inverse-depth encoding shared by the renderer and anyone checking it.
std::uint8_t encode_depth(double z, double near, double far);

// Rasterizes the scene as posed by `state` (camera, entity transforms,
// appearance). Bit-deterministic: vertices are snapped to 1/256 px and
// coverage uses integer edge functions with a top-left fill rule.
ConditioningFrame render_frame(const scene::Scene& scene, const timeline::FrameState& state,
                               RenderSize size);

// Static scene seen through `camera`.
timeline::FrameState static_state(const scene::Scene& scene, const scene::Camera& camera);

struct CharacterMask {
  std::uint16_t raster_id = 0;
  std::string character;
  GrayImage alpha;

  friend bool operator==(const CharacterMask&, const CharacterMask&) = default;
};

struct MaskSet {
  std::vector<CharacterMask> characters;
  GrayImage background;  // 255 - max over character alphas

  friend bool operator==(const MaskSet&, const MaskSet&) = default;
};

MaskSet masks_from_ids(const ConditioningFrame& frame, std::span<const std::uint16_t> character_ids,
                       double expand_px = kDefaultExpandPx,
                       double blur_sigma = kDefaultBlurSigma);

// Raster ids of every character entity in the frame legend.
std::vector<std::uint16_t> character_ids(const ConditioningFrame& frame);

// Building blocks of masks_from_ids, exposed for tests.
GrayImage dilate_disc(const GrayImage& binary, double radius_px);
GrayImage gaussian_blur(const GrayImage& image, double sigma);

// Id-buffer edge filter: 255 where a 4-neighbour carries a different id.
GrayImage outline_from_ids(const Gray16Image& ids);

RgbImage render_pose_overlay(std::span<const skeleton::PersonPose> persons, RenderSize size);

// Projects an entity's rig through `camera`. Joints that fall outside the
// image or the clip range get confidence 0.
skeleton::PersonPose project_rig(const scene::SceneEntity& entity, const Transform& entity_pose,
                                 const scene::Camera& camera, RenderSize size);

// Pose keypoints of every rigged entity in the state, in scene order.
std::vector<skeleton::PersonPose> project_rigs(const scene::Scene& scene,
                                               const timeline::FrameState& state,
                                               RenderSize size);

}  // namespace previz::raster
