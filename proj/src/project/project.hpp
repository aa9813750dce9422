// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

// Project model and its file format.
//
// File layout: one header line "previz-project/1 sha256=<hex>" followed by a
// JSON document whose SHA-256 is the header digest. Assets are referenced by
// hash and live in a sibling directory ("<name>.assets/" by default).

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "common/asset_store.hpp"
#include "gateway/gateway.hpp"
#include "scene/scene.hpp"
#include "skeleton/skeleton.hpp"
#include "style/style.hpp"
#include "timeline/timeline.hpp"

namespace previz::project {

inline constexpr std::string_view kSchema = "previz-project/1";
inline constexpr int kSchemaVersion = 1;

// An imported skeleton sequence and the remix session built on it.
struct SkeletonEntry {
  std::string id;
  std::string name;
  AssetRef sequence;  // previz-skel/1 document
  std::vector<skeleton::SkeletonLayer> layers;
  std::optional<AssetRef> output;  // recomposited previz-skel/1 document
  Extras extras;

  friend bool operator==(const SkeletonEntry&, const SkeletonEntry&) = default;
};

struct HistoryEntry {
  gateway::JobRecord job;
  std::string clip_id;
  AssetRef request;  // JSON request manifest
  bool superseded = false;
  Extras extras;

  friend bool operator==(const HistoryEntry&, const HistoryEntry&) = default;
};

struct Project {
  std::string id;
  std::string name;
  int schema_version = kSchemaVersion;
  std::vector<scene::Scene> scenes;
  std::vector<timeline::Timeline> timelines;
  std::vector<SkeletonEntry> skeletons;
  style::StyleRegistry style_overrides;
  std::vector<HistoryEntry> history;
  Extras extras;

  friend bool operator==(const Project&, const Project&) = default;

  const scene::Scene* find_scene(std::string_view id) const;
  const timeline::Timeline* find_timeline(std::string_view id) const;
  // The timeline holding clip `clip_id`, or null.
  const timeline::Timeline* timeline_of_clip(std::string_view clip_id) const;
  const SkeletonEntry* find_skeleton(std::string_view id) const;
};

// Serialized body without the header line.
std::string to_json(const Project& p);
Project from_json(std::string_view json);

std::string serialize(const Project& p);
// SchemaVersionMismatch for another previz-project version, CorruptFile for a
// missing or wrong digest or unparsable body.
Project deserialize(std::string_view file);

void save_project(const Project& p, const std::string& path);
Project load_project(const std::string& path);
// "<path minus extension>.assets"
std::string asset_dir_for(const std::string& project_path);

// Referential integrity. With a store, every referenced asset must resolve.
void validate_project(const Project& p, const AssetStore* store = nullptr);

// Style registry with project overrides applied on top of the defaults.
style::StyleRegistry effective_styles(const Project& p);

}  // namespace previz::project
