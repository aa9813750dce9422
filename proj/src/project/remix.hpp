// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

// Skeleton remix sessions stored in a project. Each call edits one
// SkeletonEntry in place; callers validate the project afterwards.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "project/project.hpp"
#include "raster/raster.hpp"

namespace previz::project {

struct ImportedSkeleton {
  SkeletonEntry* entry = nullptr;
  skeleton::SkeletonSequence sequence;
  int warnings = 0;
};

// Stores the normalized document and splits it into layers. DuplicateId
// when `id` is taken.
ImportedSkeleton import_skeleton(Project& p, AssetStore& store, const std::string& id, const std::string& name,
                                 std::string_view document);

SkeletonEntry& skeleton_entry(Project& p, std::string_view id);
skeleton::SkeletonLayer& skeleton_layer(SkeletonEntry& e, std::int64_t person_id);
skeleton::SkeletonSequence load_sequence(const SkeletonEntry& e, const AssetStore& store);

// Replaces the source with its [t0, t1) window and resets layers and output.
skeleton::SkeletonSequence crop_skeleton(Project& p, AssetStore& store, std::string_view id, double t0, double t1);

// Discards layer edits.
void split_skeleton(Project& p, const AssetStore& store, std::string_view id);

// Anchor defaults to the layer's root centroid.
std::vector<skeleton::FlaggedJoint> transform_skeleton_layer(Project& p, std::string_view id, std::int64_t person,
                                                              skeleton::Point2 translate, double scale,
                                                              std::optional<skeleton::Point2> anchor);

struct BlendTarget {
  std::string timeline_id;
  std::string track_id;  // element-animation track holding the path
  std::size_t path_index = 0;
  std::string camera_id;
  raster::RenderSize size;
  std::optional<Vec3> root_offset;
  std::optional<double> fps;  // layer rate when unset
};

// Pins a layer to a blocked motion path seen through a scene camera, camera
// tracks of that camera included.
void blend_skeleton_layer(Project& p, std::string_view id, std::int64_t person, const BlendTarget& target);

skeleton::SkeletonSequence recomposite_skeleton(Project& p, AssetStore& store, std::string_view id, double fps,
                                                double duration);

}  // namespace previz::project
