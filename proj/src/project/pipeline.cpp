// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

#include "project/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>
#include <thread>

#include "common/text.hpp"
#include "json.hpp"

namespace previz::project {

using nlohmann::json;

namespace {

struct ClipContext {
  const timeline::Timeline* timeline;
  const timeline::Clip* clip;
  const scene::Scene* scene;
};

ClipContext context(const Project& p, std::string_view clip_id) {
  const auto* tl = p.timeline_of_clip(clip_id);
  if (!tl) fail(Errc::kUnknownId, "unknown clip '" + std::string(clip_id) + "'");
  const auto* s = p.find_scene(tl->scene_id);
  if (!s) fail(Errc::kUnknownId, "timeline '" + tl->id + "' uses unknown scene '" + tl->scene_id + "'");
  return {tl, tl->find_clip(clip_id), s};
}

raster::ConditioningFrame render_with_pose(const scene::Scene& s, const timeline::FrameState& state,
                                           raster::RenderSize size) {
  auto frame = raster::render_frame(s, state, size);
  const auto persons = raster::project_rigs(s, state, size);
  frame.pose = raster::render_pose_overlay(persons, size);
  return frame;
}

std::string frame_name(std::string_view channel, int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "_%04d.png", index);
  return std::string(channel) + buf;
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

void attach(Project& p, const HistoryEntry& h) {
  auto* tl = p.timeline_of_clip(h.clip_id);
  if (!tl) return;
  auto& clip = find_clip(p, h.clip_id);
  if (h.job.status == gateway::JobStatus::kDone && !h.job.results.empty()) {
    if (h.job.kind == gateway::JobKind::kImage) {
      clip.attached_style_image = h.job.results.front().uri();
    } else {
      clip.attached_video_result = h.job.results.back().uri();
      clip.status = timeline::ClipStatus::kGenerated;
    }
  } else if (h.job.status == gateway::JobStatus::kFailed && h.job.kind == gateway::JobKind::kVideo) {
    clip.status = timeline::ClipStatus::kFailed;
  }
}

HistoryEntry& record(Project& p, gateway::Backend& backend, std::string_view clip_id, gateway::JobKind kind,
                     const std::string& job_id, const AssetRef& request_ref) {
  for (auto& h : p.history) {
    if (h.clip_id != clip_id || h.job.kind != kind || h.superseded) continue;
    if (!h.job.terminal()) {
      try {
        backend.cancel(h.job.job_id);
        h.job = backend.poll(h.job.job_id);
      } catch (const Error&) {
        // The backend may have forgotten the job; the entry is superseded either way.
      }
    }
    h.superseded = true;
  }
  HistoryEntry entry;
  entry.job = backend.poll(job_id);
  entry.clip_id = std::string(clip_id);
  entry.request = request_ref;
  p.history.push_back(std::move(entry));
  if (kind == gateway::JobKind::kVideo) find_clip(p, clip_id).status = timeline::ClipStatus::kSubmitted;
  attach(p, p.history.back());
  return p.history.back();
}

}  // namespace

timeline::Clip& find_clip(Project& p, std::string_view clip_id) {
  for (auto& t : p.timelines) {
    for (auto& c : t.clips) {
      if (c.id == clip_id) return c;
    }
  }
  fail(Errc::kUnknownId, "unknown clip '" + std::string(clip_id) + "'");
}

const timeline::Clip& find_clip(const Project& p, std::string_view clip_id) {
  return find_clip(const_cast<Project&>(p), clip_id);
}

timeline::FramePlan plan_clip(const Project& p, std::string_view clip_id, std::optional<double> fps) {
  const auto ctx = context(p, clip_id);
  const double rate = fps.value_or(ctx.clip->fps);
  auto plan = timeline::compose_sequence(*ctx.timeline, *ctx.scene, ctx.clip->t_in, ctx.clip->t_out, rate);
  // compose_sequence switches cameras by time; a clip always renders its own.
  const auto* cam = ctx.scene->find_camera(ctx.clip->camera_id);
  for (auto& f : plan.frames) {
    if (f.clip_id != clip_id) {
      const auto pinned = timeline::evaluate_at(*ctx.timeline, *ctx.scene, *cam, f.t);
      const int index = f.index;
      f = pinned;
      f.index = index;
      f.clip_id = std::string(clip_id);
    }
  }
  return plan;
}

raster::ConditioningFrame capture(const Project& p, std::string_view clip_id, int frame_index,
                                  raster::RenderSize size) {
  const auto ctx = context(p, clip_id);
  const auto plan = plan_clip(p, clip_id);
  if (frame_index < 0 || frame_index >= static_cast<int>(plan.frames.size())) {
    fail(Errc::kInvalidArgument, "frame " + std::to_string(frame_index) + " is outside clip '" +
                                     std::string(clip_id) + "' (" + std::to_string(plan.frames.size()) +
                                     " frames)");
  }
  return render_with_pose(*ctx.scene, plan.frames[static_cast<std::size_t>(frame_index)], size);
}

FrameRefs store_frame(const raster::ConditioningFrame& frame, int index, double t, AssetStore& store) {
  FrameRefs r;
  r.index = index;
  r.t = t;
  r.color = store.put(encode_png(frame.color), media::kPng);
  r.depth = store.put(encode_png(frame.depth), media::kPng);
  r.id = store.put(encode_png(frame.id), media::kPng);
  if (frame.pose) r.pose = store.put(encode_png(*frame.pose), media::kPng);
  return r;
}

RenderedClip render_clip(const Project& p, std::string_view clip_id, AssetStore& store,
                         const RenderOptions& options) {
  const auto ctx = context(p, clip_id);
  const auto plan = plan_clip(p, clip_id, options.fps);
  RenderedClip out;
  out.clip_id = std::string(clip_id);
  out.fps = plan.fps;
  out.width = options.size.width;
  out.height = options.size.height;
  json frames = json::array();
  for (const auto& state : plan.frames) {
    const auto frame = render_with_pose(*ctx.scene, state, options.size);
    if (out.frames.empty()) out.legend = frame.legend;
    out.frames.push_back(store_frame(frame, state.index, state.t, store));
    const auto& r = out.frames.back();
    frames.push_back({{"index", r.index},
                      {"t", r.t},
                      {"color", r.color.uri()},
                      {"depth", r.depth.uri()},
                      {"id", r.id.uri()},
                      {"pose", r.pose.uri()}});
  }
  const json manifest = {{"schema", kFramesSchema},   {"clip_id", out.clip_id}, {"camera_id", ctx.clip->camera_id},
                         {"fps", out.fps},            {"width", out.width},     {"height", out.height},
                         {"legend", legend_json(out.legend)}, {"frames", frames}};
  out.manifest = store.put_text(manifest.dump(1) + "\n", media::kJson);
  return out;
}

void export_rendered(const RenderedClip& clip, const AssetStore& store, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(Errc::kIoError, "cannot create " + dir);
  const std::filesystem::path root(dir);
  auto dump = [&](const AssetRef& ref, const std::string& name) {
    const auto bytes = store.get(ref.hash);
    text::write_file((root / name).string(), std::string_view(reinterpret_cast<const char*>(bytes.data()),
                                                              bytes.size()));
  };
  for (const auto& f : clip.frames) {
    dump(f.color, frame_name("color", f.index));
    dump(f.depth, frame_name("depth", f.index));
    dump(f.id, frame_name("id", f.index));
    dump(f.pose, frame_name("pose", f.index));
  }
  dump(clip.manifest, "frames.json");
}

PreparedImage prepare_restyle(const Project& p, std::string_view clip_id, const RestyleOptions& options,
                              AssetStore& store, style::LanguageModelClient* lm) {
  const auto plan = plan_clip(p, clip_id);
  const auto frame = capture(p, clip_id, options.frame_index, options.size);
  PreparedImage out;
  out.source = store_frame(frame, options.frame_index, plan.frames[static_cast<std::size_t>(options.frame_index)].t,
                           store);

  const auto ids = raster::character_ids(frame);
  const auto masks = raster::masks_from_ids(frame, ids, options.expand_px, options.blur_sigma);
  style::RegionalOptions ropt;
  for (const auto& m : masks.characters) {
    ropt.mask_refs[m.character] = store.put(encode_png(m.alpha), media::kPng).uri();
  }
  ropt.background_mask_ref = store.put(encode_png(masks.background), media::kPng).uri();
  const auto registry = effective_styles(p);
  if (const auto* entry = registry.find_style(options.fields.style)) ropt.style_lora = entry->lora;
  ropt.painted = options.painted;

  const auto bundle = style::compose_prompt(options.fields, style::default_prompt_template(), lm);
  const auto rc = style::assemble_regional(masks, registry.characters, bundle, ropt);

  auto& req = out.request;
  req.source_color = out.source.color.uri();
  req.depth = out.source.depth.uri();
  req.regions = gateway::region_specs(rc);
  req.prompt = bundle;
  req.guidance = style::resemblance_params(options.level, options.total_steps);
  req.width = options.size.width;
  req.height = options.size.height;
  out.request_ref = store.put_text(gateway::to_json(req), media::kJson);
  return out;
}

PreparedVideo prepare_generate(const Project& p, std::string_view clip_id, const GenerateOptions& options,
                               AssetStore& store, style::LanguageModelClient* lm) {
  const auto& clip = find_clip(p, clip_id);
  PreparedVideo out;
  out.conditioning = render_clip(p, clip_id, store, {options.size, std::nullopt});
  auto& req = out.request;
  for (const auto& f : out.conditioning.frames) req.depth_frames.push_back(f.depth.uri());

  if (options.skeleton_id) {
    const auto* entry = p.find_skeleton(*options.skeleton_id);
    if (!entry) fail(Errc::kUnknownId, "unknown skeleton '" + *options.skeleton_id + "'");
    const AssetRef& source = entry->output ? *entry->output : entry->sequence;
    const auto seq = skeleton::import_skeleton_sequence(store.get_text(source.hash)).sequence;
    for (const auto& f : out.conditioning.frames) {
      const double local = f.t - clip.t_in;
      const long k = std::lround((local - seq.time_offset) * seq.fps);
      const auto idx = static_cast<std::size_t>(std::clamp<long>(k, 0, static_cast<long>(seq.frames.size()) - 1));
      const auto& persons = seq.frames[idx].persons;
      const auto overlay = raster::render_pose_overlay(persons, options.size);
      req.pose_frames.push_back(store.put(encode_png(overlay), media::kPng).uri());
    }
  } else {
    for (const auto& f : out.conditioning.frames) req.pose_frames.push_back(f.pose.uri());
  }

  if (options.use_style_reference && clip.attached_style_image) req.reference_image = clip.attached_style_image;
  req.prompt = style::compose_prompt(options.fields, style::default_prompt_template(), lm);
  req.mode = options.mode;
  req.conditioning_weight = style::video_guidance(options.mode, options.guidance);
  req.fps = out.conditioning.fps;
  req.width = options.size.width;
  req.height = options.size.height;
  out.request_ref = store.put_text(gateway::to_json(req), media::kJson);
  return out;
}

HistoryEntry& submit(Project& p, gateway::Backend& backend, std::string_view clip_id, const PreparedImage& prepared) {
  find_clip(p, clip_id);
  const auto id = backend.submit_image(prepared.request);
  return record(p, backend, clip_id, gateway::JobKind::kImage, id, prepared.request_ref);
}

HistoryEntry& submit(Project& p, gateway::Backend& backend, std::string_view clip_id, const PreparedVideo& prepared) {
  find_clip(p, clip_id);
  const auto id = backend.submit_video(prepared.request);
  return record(p, backend, clip_id, gateway::JobKind::kVideo, id, prepared.request_ref);
}

bool sync_jobs(Project& p, gateway::Backend& backend) {
  bool changed = false;
  for (auto& h : p.history) {
    if (h.job.terminal()) continue;
    gateway::JobRecord rec;
    try {
      rec = backend.poll(h.job.job_id);
    } catch (const Error& e) {
      if (e.code() != Errc::kUnknownJob) throw;
      rec = h.job;
      rec.status = gateway::JobStatus::kFailed;
      rec.reason = "backend no longer knows this job";
    }
    if (rec == h.job) continue;
    h.job = rec;
    changed = true;
    if (!h.superseded && h.job.terminal()) attach(p, h);
  }
  return changed;
}

gateway::JobRecord wait_for(gateway::Backend& backend, const std::string& job_id, std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    auto rec = backend.poll(job_id);
    if (rec.terminal()) return rec;
    if (std::chrono::steady_clock::now() > deadline) fail(Errc::kInternal, "timed out waiting for " + job_id);
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
}

const HistoryEntry* current_job(const Project& p, std::string_view clip_id, gateway::JobKind kind) {
  for (auto it = p.history.rbegin(); it != p.history.rend(); ++it) {
    if (it->clip_id == clip_id && it->job.kind == kind && !it->superseded) return &*it;
  }
  return nullptr;
}

std::vector<std::string> referenced_assets(const Project& p, const AssetStore& store) {
  std::vector<std::string> queue;
  auto push = [&](std::string_view uri) {
    if (const auto h = parse_asset_uri(uri)) queue.push_back(*h);
  };
  for (const auto& t : p.timelines) {
    for (const auto& c : t.clips) {
      if (c.attached_style_image) push(*c.attached_style_image);
      if (c.attached_video_result) push(*c.attached_video_result);
    }
  }
  for (const auto& s : p.skeletons) {
    push(s.sequence.hash);
    if (s.output) push(s.output->hash);
  }
  for (const auto& r : effective_styles(p).styles) {
    if (r.lora) push(r.lora->asset);
  }
  for (const auto& c : p.style_overrides.characters) {
    if (c.lora) push(c.lora->asset);
  }
  for (const auto& h : p.history) {
    push(h.request.hash);
    for (const auto& r : h.job.results) push(r.hash);
    for (const auto& r : h.job.debug) push(r.hash);
  }
  std::set<std::string> seen;
  std::vector<std::string> out;
  while (!queue.empty()) {
    const std::string h = queue.back();
    queue.pop_back();
    if (!seen.insert(h).second) continue;
    const auto info = store.stat(h);
    if (!info) continue;
    out.push_back(h);
    if (info->kind != media::kJson && info->kind != media::kVideo) continue;
    json doc;
    try {
      doc = json::parse(store.get_text(h));
    } catch (const json::exception&) {
      continue;
    }
    std::vector<const json*> stack = {&doc};
    while (!stack.empty()) {
      const json* j = stack.back();
      stack.pop_back();
      if (j->is_string()) {
        push(j->get_ref<const std::string&>());
      } else if (j->is_structured()) {
        for (const auto& child : *j) stack.push_back(&child);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t copy_assets(const Project& p, const AssetStore& from, AssetStore& to) {
  std::size_t n = 0;
  for (const auto& h : referenced_assets(p, from)) {
    if (to.contains(h)) continue;
    to.put(from.get(h), from.stat(h)->kind);
    ++n;
  }
  return n;
}

double mean_abs_difference_png(const AssetStore& store, const std::string& a, const std::string& b) {
  return mean_abs_difference(decode_png_rgb(store.get(a)), decode_png_rgb(store.get(b)));
}

}  // namespace previz::project
