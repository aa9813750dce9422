// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

#include "project/remix.hpp"

namespace previz::project {

ImportedSkeleton import_skeleton(Project& p, AssetStore& store, const std::string& id, const std::string& name,
                                 std::string_view document) {
  if (id.empty()) fail(Errc::kInvalidArgument, "skeleton id must not be empty");
  if (p.find_skeleton(id)) fail(Errc::kDuplicateId, "skeleton '" + id + "' exists");
  auto imported = skeleton::import_skeleton_sequence(document);
  SkeletonEntry e;
  e.id = id;
  e.name = name.empty() ? id : name;
  e.sequence = store.put_text(skeleton::export_skeleton_sequence(imported.sequence), media::kSkeleton);
  e.layers = skeleton::split_layers(imported.sequence);
  p.skeletons.push_back(std::move(e));
  return {&p.skeletons.back(), std::move(imported.sequence), imported.warnings};
}

SkeletonEntry& skeleton_entry(Project& p, std::string_view id) {
  for (auto& s : p.skeletons) {
    if (s.id == id) return s;
  }
  fail(Errc::kUnknownId, "unknown skeleton '" + std::string(id) + "'");
}

skeleton::SkeletonLayer& skeleton_layer(SkeletonEntry& e, std::int64_t person_id) {
  for (auto& l : e.layers) {
    if (l.person_id == person_id) return l;
  }
  fail(Errc::kUnknownId, "skeleton '" + e.id + "' has no layer for person " + std::to_string(person_id));
}

skeleton::SkeletonSequence load_sequence(const SkeletonEntry& e, const AssetStore& store) {
  return skeleton::import_skeleton_sequence(store.get_text(e.sequence.hash)).sequence;
}

skeleton::SkeletonSequence crop_skeleton(Project& p, AssetStore& store, std::string_view id, double t0, double t1) {
  auto& e = skeleton_entry(p, id);
  auto cropped = skeleton::crop(load_sequence(e, store), t0, t1);
  e.sequence = store.put_text(skeleton::export_skeleton_sequence(cropped), media::kSkeleton);
  e.layers = skeleton::split_layers(cropped);
  e.output.reset();
  return cropped;
}

void split_skeleton(Project& p, const AssetStore& store, std::string_view id) {
  auto& e = skeleton_entry(p, id);
  e.layers = skeleton::split_layers(load_sequence(e, store));
}

std::vector<skeleton::FlaggedJoint> transform_skeleton_layer(Project& p, std::string_view id, std::int64_t person,
                                                              skeleton::Point2 translate, double scale,
                                                              std::optional<skeleton::Point2> anchor) {
  auto& layer = skeleton_layer(skeleton_entry(p, id), person);
  const auto a = anchor ? *anchor : skeleton::layer_root_centroid(layer).value_or(skeleton::Point2{0.5, 0.5});
  auto result = skeleton::transform_layer(layer, translate, scale, a);
  layer = std::move(result.layer);
  return std::move(result.flagged);
}

void blend_skeleton_layer(Project& p, std::string_view id, std::int64_t person, const BlendTarget& target) {
  const auto* tl = p.find_timeline(target.timeline_id);
  if (!tl) fail(Errc::kUnknownId, "unknown timeline '" + target.timeline_id + "'");
  const auto* track = tl->find_track(target.track_id);
  if (!track) fail(Errc::kUnknownId, "unknown track '" + target.track_id + "'");
  if (target.path_index >= track->paths.size()) {
    fail(Errc::kUnknownId, "track '" + target.track_id + "' has no path " + std::to_string(target.path_index));
  }
  const auto* s = p.find_scene(tl->scene_id);
  if (!s) fail(Errc::kUnknownId, "unknown scene '" + tl->scene_id + "'");
  const auto* cam = s->find_camera(target.camera_id);
  if (!cam) fail(Errc::kUnknownId, "unknown camera '" + target.camera_id + "'");

  skeleton::BlockingView view;
  view.camera = *cam;
  for (const auto& t : tl->tracks) {
    if (t.kind == timeline::TrackKind::kCamera && t.target_id == cam->id) view.camera_tracks.push_back(t);
  }
  view.width = target.size.width;
  view.height = target.size.height;
  if (target.root_offset) view.root_offset = *target.root_offset;
  const auto path = track->paths[target.path_index];

  auto& layer = skeleton_layer(skeleton_entry(p, id), person);
  layer = skeleton::blend_with_blocking(layer, path, view, target.fps.value_or(layer.fps));
}

skeleton::SkeletonSequence recomposite_skeleton(Project& p, AssetStore& store, std::string_view id, double fps,
                                                double duration) {
  auto& e = skeleton_entry(p, id);
  auto out = skeleton::recomposite(e.layers, fps, duration);
  e.output = store.put_text(skeleton::export_skeleton_sequence(out), media::kSkeleton);
  return out;
}

}  // namespace previz::project
