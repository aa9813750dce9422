// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

#include "gateway/wire.hpp"

namespace previz::gateway::wire {

namespace {

template <typename T>
T field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    fail(Errc::kInvalidRequest, std::string("missing field '") + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    fail(Errc::kInvalidRequest, std::string("field '") + key + "' has the wrong type");
  }
}

template <typename T>
T field_or(const json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return fallback;
  return field<T>(j, key);
}

const json& array_field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key) || !j.at(key).is_array()) {
    fail(Errc::kInvalidRequest, std::string("field '") + key + "' must be an array");
  }
  return j.at(key);
}

style::StyleTag style_of(const std::string& s) {
  auto t = style::parse_style(s);
  if (!t) fail(Errc::kInvalidRequest, "unknown style '" + s + "'");
  return *t;
}

}  // namespace

std::string_view region_kind_name(style::RegionKind k) {
  switch (k) {
    case style::RegionKind::kCharacter: return "character";
    case style::RegionKind::kPainted: return "painted";
    case style::RegionKind::kBackground: return "background";
  }
  return "?";
}

json encode(const AssetRef& r) { return {{"hash", r.hash}, {"kind", r.kind}, {"size", r.size}}; }

AssetRef decode_asset_ref(const json& j) {
  AssetRef r{field<std::string>(j, "hash"), field<std::string>(j, "kind"), field<std::uint64_t>(j, "size")};
  if (!parse_asset_uri(r.hash)) fail(Errc::kInvalidRequest, "bad asset hash '" + r.hash + "'");
  return r;
}

json encode(const style::PromptBundle& b) {
  json j = {{"background_prompt", b.background_prompt},
            {"style_tag", style::style_name(b.style_tag)},
            {"mood_tone", b.mood_tone},
            {"genre", b.genre},
            {"per_character", b.per_character},
            {"seed", b.seed},
            {"from_language_model", b.from_language_model}};
  j["motion_prompt"] = b.motion_prompt ? json(*b.motion_prompt) : json(nullptr);
  return j;
}

style::PromptBundle decode_bundle(const json& j) {
  style::PromptBundle b;
  b.background_prompt = field<std::string>(j, "background_prompt");
  b.style_tag = style_of(field<std::string>(j, "style_tag"));
  b.mood_tone = field_or<std::string>(j, "mood_tone", "");
  b.genre = field_or<std::string>(j, "genre", "");
  b.per_character = field_or<std::map<std::string, std::string>>(j, "per_character", {});
  if (j.contains("motion_prompt") && !j["motion_prompt"].is_null()) {
    b.motion_prompt = field<std::string>(j, "motion_prompt");
  }
  b.seed = field<std::uint64_t>(j, "seed");
  b.from_language_model = field_or<bool>(j, "from_language_model", false);
  return b;
}

json encode(const style::GuidanceParams& g) {
  return {{"total_steps", g.total_steps},
          {"skip_steps", g.skip_steps},
          {"control_strength", g.control_strength},
          {"use_latent_blend", g.use_latent_blend}};
}

style::GuidanceParams decode_guidance(const json& j) {
  style::GuidanceParams g;
  g.total_steps = field<int>(j, "total_steps");
  g.skip_steps = field<int>(j, "skip_steps");
  g.control_strength = field<double>(j, "control_strength");
  g.use_latent_blend = field<bool>(j, "use_latent_blend");
  if (g.total_steps < 1 || g.skip_steps < 0 || g.skip_steps >= g.total_steps) {
    fail(Errc::kInvalidRequest, "guidance requires 0 <= skip_steps < total_steps");
  }
  if (!(g.control_strength >= 0 && g.control_strength <= 1)) {
    fail(Errc::kInvalidRequest, "control_strength must be in [0, 1]");
  }
  return g;
}

json encode(const style::LoraRef& l) { return {{"asset", l.asset}, {"weight", l.weight}}; }

style::LoraRef decode_lora(const json& j) {
  style::LoraRef l{field<std::string>(j, "asset"), field<double>(j, "weight")};
  if (!(l.weight > 0 && l.weight <= 1)) fail(Errc::kInvalidRequest, "lora weight must be in (0, 1]");
  return l;
}

json encode(const RegionSpec& r) {
  json loras = json::array();
  for (const auto& l : r.loras) loras.push_back(encode(l));
  return {{"kind", region_kind_name(r.kind)},
          {"character_id", r.character_id},
          {"mask_ref", r.mask_ref},
          {"prompt", r.prompt},
          {"loras", loras}};
}

RegionSpec decode_region(const json& j) {
  RegionSpec r;
  const auto kind = field<std::string>(j, "kind");
  if (kind == "character") {
    r.kind = style::RegionKind::kCharacter;
  } else if (kind == "painted") {
    r.kind = style::RegionKind::kPainted;
  } else if (kind == "background") {
    r.kind = style::RegionKind::kBackground;
  } else {
    fail(Errc::kInvalidRequest, "unknown region kind '" + kind + "'");
  }
  r.character_id = field_or<std::string>(j, "character_id", "");
  r.mask_ref = field<std::string>(j, "mask_ref");
  r.prompt = field<std::string>(j, "prompt");
  for (const auto& l : field_or<json>(j, "loras", json::array())) r.loras.push_back(decode_lora(l));
  return r;
}

json encode(const ImageJobRequest& r) {
  json regions = json::array();
  for (const auto& x : r.regions) regions.push_back(encode(x));
  return {{"source_color", r.source_color}, {"depth", r.depth},   {"regions", regions},
          {"prompt", encode(r.prompt)},     {"guidance", encode(r.guidance)},
          {"width", r.width},               {"height", r.height}};
}

ImageJobRequest decode_image_request(const json& j) {
  ImageJobRequest r;
  r.source_color = field<std::string>(j, "source_color");
  r.depth = field<std::string>(j, "depth");
  for (const auto& x : array_field(j, "regions")) r.regions.push_back(decode_region(x));
  r.prompt = decode_bundle(field<json>(j, "prompt"));
  r.guidance = decode_guidance(field<json>(j, "guidance"));
  r.width = field<int>(j, "width");
  r.height = field<int>(j, "height");
  return r;
}

json encode(const VideoJobRequest& r) {
  json j = {{"depth_frames", r.depth_frames},
            {"pose_frames", r.pose_frames},
            {"prompt", encode(r.prompt)},
            {"mode", style::video_mode_name(r.mode)},
            {"conditioning_weight", r.conditioning_weight},
            {"fps", r.fps},
            {"width", r.width},
            {"height", r.height}};
  j["reference_image"] = r.reference_image ? json(*r.reference_image) : json(nullptr);
  return j;
}

VideoJobRequest decode_video_request(const json& j) {
  VideoJobRequest r;
  r.depth_frames = field_or<std::vector<std::string>>(j, "depth_frames", {});
  r.pose_frames = field_or<std::vector<std::string>>(j, "pose_frames", {});
  if (j.contains("reference_image") && !j["reference_image"].is_null()) {
    r.reference_image = field<std::string>(j, "reference_image");
  }
  r.prompt = decode_bundle(field<json>(j, "prompt"));
  const auto mode = style::parse_video_mode(field<std::string>(j, "mode"));
  if (!mode) fail(Errc::kInvalidRequest, "unknown video mode");
  r.mode = *mode;
  r.conditioning_weight = field<double>(j, "conditioning_weight");
  r.fps = field<double>(j, "fps");
  r.width = field<int>(j, "width");
  r.height = field<int>(j, "height");
  return r;
}

json encode(const JobRecord& r) {
  json results = json::array();
  for (const auto& a : r.results) results.push_back(encode(a));
  json debug = json::array();
  for (const auto& a : r.debug) debug.push_back(encode(a));
  return {{"job_id", r.job_id},
          {"kind", job_kind_name(r.kind)},
          {"status", job_status_name(r.status)},
          {"progress", r.progress},
          {"reason", r.reason},
          {"submitted_at_ms", r.submitted_at_ms},
          {"results", results},
          {"debug", debug}};
}

JobRecord decode_job_record(const json& j) {
  JobRecord r;
  r.job_id = field<std::string>(j, "job_id");
  const auto kind = field<std::string>(j, "kind");
  if (kind == "image") {
    r.kind = JobKind::kImage;
  } else if (kind == "video") {
    r.kind = JobKind::kVideo;
  } else {
    fail(Errc::kInvalidRequest, "unknown job kind '" + kind + "'");
  }
  const auto status = field<std::string>(j, "status");
  if (status == "queued") {
    r.status = JobStatus::kQueued;
  } else if (status == "running") {
    r.status = JobStatus::kRunning;
  } else if (status == "done") {
    r.status = JobStatus::kDone;
  } else if (status == "failed") {
    r.status = JobStatus::kFailed;
  } else {
    fail(Errc::kInvalidRequest, "unknown job status '" + status + "'");
  }
  r.progress = field<double>(j, "progress");
  r.reason = field_or<std::string>(j, "reason", "");
  r.submitted_at_ms = field<std::int64_t>(j, "submitted_at_ms");
  for (const auto& a : array_field(j, "results")) r.results.push_back(decode_asset_ref(a));
  for (const auto& a : field_or<json>(j, "debug", json::array())) r.debug.push_back(decode_asset_ref(a));
  return r;
}

}  // namespace previz::gateway::wire

namespace previz::gateway {

namespace {

wire::json parse_or_fail(std::string_view s) {
  try {
    return wire::json::parse(s);
  } catch (const wire::json::exception& e) {
    fail(Errc::kInvalidRequest, std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

std::string to_json(const ImageJobRequest& req) { return wire::encode(req).dump(); }
std::string to_json(const VideoJobRequest& req) { return wire::encode(req).dump(); }
std::string to_json(const JobRecord& rec) { return wire::encode(rec).dump(); }
ImageJobRequest image_request_from_json(std::string_view s) {
  return wire::decode_image_request(parse_or_fail(s));
}
VideoJobRequest video_request_from_json(std::string_view s) {
  return wire::decode_video_request(parse_or_fail(s));
}
JobRecord job_record_from_json(std::string_view s) { return wire::decode_job_record(parse_or_fail(s)); }

}  // namespace previz::gateway
