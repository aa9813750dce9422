// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

#include <set>

#include "project/project.hpp"

namespace previz::project {

namespace {

template <typename Range>
void require_unique_ids(const Range& items, std::string_view what) {
  std::set<std::string> seen;
  for (const auto& item : items) {
    if (item.id.empty()) fail(Errc::kInvalidArgument, std::string(what) + " id is empty");
    if (!seen.insert(item.id).second) fail(Errc::kDuplicateId, std::string(what) + " '" + item.id + "' is duplicated");
  }
}

void require_asset(const AssetStore* store, const std::string& uri, const std::string& owner) {
  if (!parse_asset_uri(uri)) fail(Errc::kInvalidArgument, owner + " holds malformed asset ref '" + uri + "'");
  if (store && !store->contains(uri)) fail(Errc::kUnknownAsset, owner + " references missing asset " + uri);
}

}  // namespace

void validate_project(const Project& p, const AssetStore* store) {
  if (p.schema_version != kSchemaVersion) fail(Errc::kSchemaVersionMismatch, "unsupported schema version");
  require_unique_ids(p.scenes, "scene");
  require_unique_ids(p.timelines, "timeline");
  require_unique_ids(p.skeletons, "skeleton");
  for (const auto& s : p.scenes) scene::validate_scene(s);

  std::set<std::string> clip_ids;
  for (const auto& t : p.timelines) {
    const auto* s = p.find_scene(t.scene_id);
    if (!s) fail(Errc::kUnknownId, "timeline '" + t.id + "' uses unknown scene '" + t.scene_id + "'");
    timeline::validate_timeline(t, *s);
    for (const auto& c : t.clips) {
      if (!clip_ids.insert(c.id).second) fail(Errc::kDuplicateId, "clip '" + c.id + "' is duplicated");
      if (c.attached_style_image) require_asset(store, *c.attached_style_image, "clip '" + c.id + "'");
      if (c.attached_video_result) require_asset(store, *c.attached_video_result, "clip '" + c.id + "'");
    }
  }
  for (const auto& s : p.skeletons) {
    require_asset(store, s.sequence.uri(), "skeleton '" + s.id + "'");
    if (s.output) require_asset(store, s.output->uri(), "skeleton '" + s.id + "'");
  }
  std::set<std::string> job_ids;
  for (const auto& h : p.history) {
    if (!clip_ids.count(h.clip_id)) {
      fail(Errc::kUnknownId, "history entry " + h.job.job_id + " names unknown clip '" + h.clip_id + "'");
    }
    if (!job_ids.insert(h.job.job_id).second) fail(Errc::kDuplicateId, "job '" + h.job.job_id + "' is duplicated");
    const std::string owner = "job " + h.job.job_id;
    require_asset(store, h.request.uri(), owner);
    for (const auto& r : h.job.results) require_asset(store, r.uri(), owner);
    for (const auto& r : h.job.debug) require_asset(store, r.uri(), owner);
  }
  for (const auto& s : p.style_overrides.characters) {
    if (s.character_id.empty()) fail(Errc::kInvalidArgument, "character profile without id");
  }
}

style::StyleRegistry effective_styles(const Project& p) {
  style::StyleRegistry out = style::default_style_registry();
  for (const auto& s : p.style_overrides.styles) {
    bool replaced = false;
    for (auto& e : out.styles) {
      if (e.tag == s.tag) {
        e = s;
        replaced = true;
      }
    }
    if (!replaced) out.styles.push_back(s);
  }
  for (const auto& c : p.style_overrides.characters) {
    bool replaced = false;
    for (auto& e : out.characters) {
      if (e.character_id == c.character_id) {
        e = c;
        replaced = true;
      }
    }
    if (!replaced) out.characters.push_back(c);
  }
  return out;
}

}  // namespace previz::project
