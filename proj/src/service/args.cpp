// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

#include "service/args.hpp"

#include <filesystem>

#include "common/text.hpp"
#include "project/codec.hpp"
#include "project/remix.hpp"

namespace previz::service::args {

std::string require_string(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_string() || it->get_ref<const std::string&>().empty()) {
    fail(Errc::kInvalidRequest, std::string("missing string field '") + key + "'");
  }
  return it->get<std::string>();
}

json parse_object(std::string_view text) {
  if (text.empty()) return json::object();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(Errc::kInvalidRequest, std::string("not JSON: ") + e.what());
  }
  if (j.is_null()) return json::object();
  if (!j.is_object()) fail(Errc::kInvalidRequest, "expected a JSON object");
  return j;
}

raster::RenderSize size_of(const json& j, raster::RenderSize fallback) {
  return {value_or(j, "width", fallback.width), value_or(j, "height", fallback.height)};
}

skeleton::Point2 point_of(const json& j, skeleton::Point2 fallback) {
  if (j.is_null()) return fallback;
  if (!j.is_array() || j.size() != 2) fail(Errc::kInvalidRequest, "expected [x, y]");
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

style::PromptFields fields_from_json(const json& j) {
  style::PromptFields f;
  if (j.contains("style")) {
    const auto name = j.at("style").get<std::string>();
    const auto tag = style::parse_style(name);
    if (!tag) fail(Errc::kInvalidRequest, "unknown style '" + name + "'");
    f.style = *tag;
  }
  f.mood_tone = value_or<std::string>(j, "mood_tone", "");
  f.genre = value_or<std::string>(j, "genre", "");
  f.background_description = value_or<std::string>(j, "background_description", "");
  if (j.contains("characters")) {
    for (const auto& c : j.at("characters")) {
      f.characters.push_back({c.at("character_id").get<std::string>(), c.value("description", "")});
    }
  }
  if (j.contains("motion") && !j.at("motion").is_null()) f.motion = j.at("motion").get<std::string>();
  if (j.contains("seed") && !j.at("seed").is_null()) f.seed = j.at("seed").get<std::uint64_t>();
  return f;
}

json fields_json(const style::PromptFields& f) {
  json j = json::parse(style::fields_to_json(f));
  if (f.seed) j["seed"] = *f.seed;
  return j;
}

project::RestyleOptions restyle_options(const json& j) {
  project::RestyleOptions opt;
  if (j.contains("level")) {
    const auto level = style::parse_level(j.at("level").get<std::string>());
    if (!level) fail(Errc::kInvalidRequest, "unknown resemblance level '" + j.at("level").get<std::string>() + "'");
    opt.level = *level;
  }
  if (j.contains("fields")) opt.fields = fields_from_json(j.at("fields"));
  opt.frame_index = value_or(j, "frame", 0);
  opt.size = size_of(j);
  opt.total_steps = value_or(j, "total_steps", opt.total_steps);
  opt.expand_px = value_or(j, "expand_px", opt.expand_px);
  opt.blur_sigma = value_or(j, "blur_sigma", opt.blur_sigma);
  if (j.contains("painted")) {
    for (const auto& r : j.at("painted")) {
      opt.painted.push_back({r.at("mask_ref").get<std::string>(), r.at("prompt").get<std::string>()});
    }
  }
  return opt;
}

project::GenerateOptions generate_options(const json& j) {
  project::GenerateOptions opt;
  if (j.contains("fields")) opt.fields = fields_from_json(j.at("fields"));
  if (j.contains("mode")) {
    const auto mode = style::parse_video_mode(j.at("mode").get<std::string>());
    if (!mode) fail(Errc::kInvalidRequest, "unknown video guidance mode '" + j.at("mode").get<std::string>() + "'");
    opt.mode = *mode;
  }
  opt.guidance.creative_weight = value_or(j, "creative_weight", opt.guidance.creative_weight);
  opt.size = size_of(j);
  if (j.contains("skeleton_id") && !j.at("skeleton_id").is_null()) {
    opt.skeleton_id = j.at("skeleton_id").get<std::string>();
  }
  opt.use_style_reference = value_or(j, "use_style_reference", true);
  return opt;
}

json frame_refs_json(const project::FrameRefs& r) {
  return {{"index", r.index},         {"t", r.t},         {"color", r.color.uri()},
          {"depth", r.depth.uri()},   {"id", r.id.uri()}, {"pose", r.pose.uri()}};
}

json legend_json(const std::vector<raster::LegendEntry>& legend) {
  json out = json::array();
  for (const auto& e : legend) {
    out.push_back({{"raster_id", e.raster_id},
                   {"entity_id", e.entity_id},
                   {"character", e.character},
                   {"is_character", e.is_character}});
  }
  return out;
}

json rendered_json(const project::RenderedClip& rc) {
  json frames = json::array();
  for (const auto& f : rc.frames) frames.push_back(frame_refs_json(f));
  return {{"clip_id", rc.clip_id},   {"fps", rc.fps},
          {"width", rc.width},       {"height", rc.height},
          {"manifest", rc.manifest.uri()}, {"legend", legend_json(rc.legend)},
          {"frames", frames}};
}

json plan_json(const timeline::FramePlan& plan) {
  json frames = json::array();
  for (const auto& f : plan.frames) {
    frames.push_back({{"index", f.index},
                      {"t", f.t},
                      {"clip_id", f.clip_id},
                      {"camera", project::codec::encode(f.camera)}});
  }
  return {{"t0", plan.t0}, {"t1", plan.t1}, {"fps", plan.fps}, {"frames", frames},
          {"table", timeline::frame_plan_table(plan)}};
}

json sequence_json(const skeleton::SkeletonSequence& seq) {
  return {{"fps", seq.fps},
          {"frames", seq.frames.size()},
          {"duration", seq.duration()},
          {"persons", seq.person_ids()},
          {"source_width", seq.source_width},
          {"source_height", seq.source_height}};
}

json run_remix_script(project::Project& p, AssetStore& store, const json& script, const std::string& base_dir) {
  const std::string id = require_string(script, "skeleton_id");
  if (!script.contains("steps") || !script.at("steps").is_array()) {
    fail(Errc::kInvalidRequest, "remix script needs a 'steps' array");
  }
  json results = json::array();
  for (const auto& step : script.at("steps")) {
    const std::string op = require_string(step, "op");
    json r = {{"op", op}};
    if (op == "import") {
      std::string document;
      if (step.contains("document")) {
        document = step.at("document").get<std::string>();
      } else if (step.contains("path")) {
        std::filesystem::path path(step.at("path").get<std::string>());
        if (path.is_relative()) path = std::filesystem::path(base_dir) / path;
        document = text::read_file(path.string());
      } else {
        document = store.get_text(require_string(step, "asset"));
      }
      const auto imported = project::import_skeleton(p, store, id, value_or<std::string>(step, "name", id), document);
      r.update(sequence_json(imported.sequence));
      r["warnings"] = imported.warnings;
    } else if (op == "crop") {
      r.update(sequence_json(
          project::crop_skeleton(p, store, id, step.at("t0").get<double>(), step.at("t1").get<double>())));
    } else if (op == "split") {
      project::split_skeleton(p, store, id);
    } else if (op == "transform") {
      std::optional<skeleton::Point2> anchor;
      if (step.contains("anchor") && !step.at("anchor").is_null()) anchor = point_of(step.at("anchor"));
      const auto flagged = project::transform_skeleton_layer(p, id, step.at("person").get<std::int64_t>(),
                                                             point_of(step.value("translate", json())),
                                                             value_or(step, "scale", 1.0), anchor);
      r["flagged"] = flagged.size();
    } else if (op == "blend") {
      project::BlendTarget target;
      target.timeline_id = require_string(step, "timeline_id");
      target.track_id = require_string(step, "track_id");
      target.camera_id = require_string(step, "camera_id");
      target.path_index = value_or<std::size_t>(step, "path_index", 0);
      target.size = size_of(step);
      if (step.contains("root_offset")) target.root_offset = project::codec::decode_vec3(step.at("root_offset"));
      if (step.contains("fps")) target.fps = step.at("fps").get<double>();
      project::blend_skeleton_layer(p, id, step.at("person").get<std::int64_t>(), target);
    } else if (op == "recomposite") {
      r.update(sequence_json(project::recomposite_skeleton(p, store, id, value_or(step, "fps", timeline::kDefaultFps),
                                                           step.at("duration").get<double>())));
      r["output"] = project::skeleton_entry(p, id).output->uri();
    } else {
      fail(Errc::kInvalidRequest, "unknown remix op '" + op + "'");
    }
    results.push_back(r);
  }
  json out = {{"skeleton_id", id}, {"steps", results}};
  const auto& e = project::skeleton_entry(p, id);
  if (e.output) out["output"] = e.output->uri();
  return out;
}

}  // namespace previz::service::args
