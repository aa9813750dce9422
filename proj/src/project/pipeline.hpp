// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

// Clip-level operations: conditioning capture, restyle and video requests,
// and the job history kept in the project.

#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "gateway/gateway.hpp"
#include "project/project.hpp"
#include "raster/raster.hpp"

namespace previz::project {

inline constexpr std::string_view kFramesSchema = "previz-frames/1";

struct FrameRefs {
  int index = 0;
  double t = 0;
  AssetRef color;
  AssetRef depth;
  AssetRef id;
  AssetRef pose;

  friend bool operator==(const FrameRefs&, const FrameRefs&) = default;
};

struct RenderOptions {
  raster::RenderSize size;
  std::optional<double> fps;  // clip rate when unset
};

struct RenderedClip {
  std::string clip_id;
  double fps = 16;
  int width = 0;
  int height = 0;
  std::vector<FrameRefs> frames;
  std::vector<raster::LegendEntry> legend;
  AssetRef manifest;  // previz-frames/1 JSON

  friend bool operator==(const RenderedClip&, const RenderedClip&) = default;
};

timeline::Clip& find_clip(Project& p, std::string_view clip_id);
const timeline::Clip& find_clip(const Project& p, std::string_view clip_id);

// The full frame plan of a clip. UnknownId for a missing clip.
timeline::FramePlan plan_clip(const Project& p, std::string_view clip_id, std::optional<double> fps = {});

// One conditioning frame with the rig pose overlay filled in.
raster::ConditioningFrame capture(const Project& p, std::string_view clip_id, int frame_index,
                                  raster::RenderSize size = {});
FrameRefs store_frame(const raster::ConditioningFrame& frame, int index, double t, AssetStore& store);

RenderedClip render_clip(const Project& p, std::string_view clip_id, AssetStore& store,
                         const RenderOptions& options = {});

// Writes <channel>_NNNN.png for color, depth, id and pose plus frames.json.
void export_rendered(const RenderedClip& clip, const AssetStore& store, const std::string& dir);

struct RestyleOptions {
  style::ResemblanceLevel level = style::ResemblanceLevel::kFaithful;
  style::PromptFields fields;
  int frame_index = 0;
  raster::RenderSize size;
  int total_steps = style::kReferenceSteps;
  double expand_px = raster::kDefaultExpandPx;
  double blur_sigma = raster::kDefaultBlurSigma;
  std::vector<style::PaintedRegion> painted;
};

struct PreparedImage {
  gateway::ImageJobRequest request;
  AssetRef request_ref;
  FrameRefs source;
};

PreparedImage prepare_restyle(const Project& p, std::string_view clip_id, const RestyleOptions& options,
                              AssetStore& store, style::LanguageModelClient* lm = nullptr);

struct GenerateOptions {
  style::PromptFields fields;
  style::VideoGuidanceMode mode = style::VideoGuidanceMode::kResemble;
  style::VideoGuidanceConfig guidance;
  raster::RenderSize size;
  // Remixed skeleton entry to use as pose guidance instead of the rigs.
  std::optional<std::string> skeleton_id;
  // Use the clip's restyled keyframe as the appearance reference.
  bool use_style_reference = true;
};

struct PreparedVideo {
  gateway::VideoJobRequest request;
  AssetRef request_ref;
  RenderedClip conditioning;
};

PreparedVideo prepare_generate(const Project& p, std::string_view clip_id, const GenerateOptions& options,
                               AssetStore& store, style::LanguageModelClient* lm = nullptr);

// Cancels in-flight jobs of the same kind on the clip, marks every earlier
// entry of that kind superseded and records the new job.
HistoryEntry& submit(Project& p, gateway::Backend& backend, std::string_view clip_id,
                     const PreparedImage& prepared);
HistoryEntry& submit(Project& p, gateway::Backend& backend, std::string_view clip_id,
                     const PreparedVideo& prepared);

// Polls unfinished jobs and attaches finished results to their clips.
// Returns true when any record changed.
bool sync_jobs(Project& p, gateway::Backend& backend);

// Polls until the job is done or failed. Internal error on timeout.
gateway::JobRecord wait_for(gateway::Backend& backend, const std::string& job_id,
                            std::chrono::milliseconds timeout = std::chrono::seconds(60));

// Latest non-superseded entry of `kind` for a clip.
const HistoryEntry* current_job(const Project& p, std::string_view clip_id, gateway::JobKind kind);

// Hashes of every asset the project depends on: direct refs plus anything
// named inside referenced JSON documents (request manifests, containers).
std::vector<std::string> referenced_assets(const Project& p, const AssetStore& store);

// Copies referenced_assets(p) from one store into another.
std::size_t copy_assets(const Project& p, const AssetStore& from, AssetStore& to);

double mean_abs_difference_png(const AssetStore& store, const std::string& a, const std::string& b);

}  // namespace previz::project
