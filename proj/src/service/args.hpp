// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

// JSON option parsing and result encoding shared by the HTTP service and the
// C interface.

#pragma once

#include <optional>
#include <string>

#include "json.hpp"
#include "project/pipeline.hpp"
#include "timeline/timeline.hpp"

namespace previz::service::args {

using nlohmann::json;

template <typename T>
T value_or(const json& j, const char* key, T fallback) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  return it->get<T>();
}

// InvalidRequest unless `key` holds a non-empty string.
std::string require_string(const json& j, const char* key);
// Object or empty; InvalidRequest otherwise.
json parse_object(std::string_view text);

raster::RenderSize size_of(const json& j, raster::RenderSize fallback = {});
skeleton::Point2 point_of(const json& j, skeleton::Point2 fallback = {});

// Same keys as style::fields_to_json plus "seed".
style::PromptFields fields_from_json(const json& j);
json fields_json(const style::PromptFields& f);

project::RestyleOptions restyle_options(const json& j);
project::GenerateOptions generate_options(const json& j);

json frame_refs_json(const project::FrameRefs& r);
json legend_json(const std::vector<raster::LegendEntry>& legend);
json rendered_json(const project::RenderedClip& rc);
json plan_json(const timeline::FramePlan& plan);
json sequence_json(const skeleton::SkeletonSequence& seq);

// Applies {"skeleton_id", "steps": [...]} to a project. Step ops: import
// (document | path | asset), crop, split, transform, blend, recomposite.
// Relative import paths resolve against `base_dir`.
json run_remix_script(project::Project& p, AssetStore& store, const json& script, const std::string& base_dir);

}  // namespace previz::service::args
