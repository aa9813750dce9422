// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <random>

#include "common/hash.hpp"
#include "gateway/gateway.hpp"
#include "gateway/wire.hpp"

namespace previz::gateway {

namespace {

constexpr int kMaxSide = 4096;

using Color = std::array<double, 3>;

struct Palette {
  std::array<Color, 5> stops;

  Color at(double t) const {
    t = std::clamp(t, 0.0, 1.0) * 4;
    const int i = std::min(3, static_cast<int>(t));
    const double f = t - i;
    return {stops[i][0] + (stops[i + 1][0] - stops[i][0]) * f,
            stops[i][1] + (stops[i + 1][1] - stops[i][1]) * f,
            stops[i][2] + (stops[i + 1][2] - stops[i][2]) * f};
  }
};

Palette make_palette(std::uint64_t key) {
  Palette p;
  for (int i = 0; i < 5; ++i) {
    const std::uint64_t h = mix64(key + static_cast<std::uint64_t>(i));
    p.stops[i] = {static_cast<double>(h & 0xff), static_cast<double>((h >> 8) & 0xff),
                  static_cast<double>((h >> 16) & 0xff)};
  }
  return p;
}

std::uint64_t bundle_key(const style::PromptBundle& b) {
  return fnv1a64(style::style_name(b.style_tag)) ^ mix64(b.seed);
}

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

double luma(const std::uint8_t* px) { return (0.2126 * px[0] + 0.7152 * px[1] + 0.0722 * px[2]) / 255; }

[[noreturn]] void invalid(const std::string& what) { fail(Errc::kInvalidRequest, what); }

void require_ref(const AssetStore& store, const std::string& ref, const std::string& role) {
  if (!store.contains(ref)) invalid("unresolved " + role + " ref '" + ref + "'");
}

template <typename Decode>
auto load(const AssetStore& store, const std::string& ref, const std::string& role, Decode decode) {
  try {
    const auto bytes = store.get(ref);
    return decode(bytes);
  } catch (const Error& e) {
    if (e.code() == Errc::kUnknownAsset) invalid("unresolved " + role + " ref '" + ref + "'");
    invalid(role + " ref '" + ref + "' is not a usable image: " + e.what());
  }
}

RgbImage load_rgb(const AssetStore& s, const std::string& ref, const std::string& role) {
  return load(s, ref, role, [](const auto& b) { return decode_png_rgb(b); });
}

GrayImage load_gray(const AssetStore& s, const std::string& ref, const std::string& role) {
  return load(s, ref, role, [](const auto& b) { return decode_png_gray(b); });
}

template <typename Img>
void require_size(const Img& img, int w, int h, const std::string& role, const std::string& ref) {
  if (!img.same_size(w, h)) {
    invalid(role + " ref '" + ref + "' is " + std::to_string(img.width) + "x" +
            std::to_string(img.height) + ", expected " + std::to_string(w) + "x" + std::to_string(h));
  }
}

void require_dims(int w, int h) {
  if (w < 1 || h < 1 || w > kMaxSide || h > kMaxSide) invalid("output size out of range");
}

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace

std::vector<RegionSpec> region_specs(const style::RegionalConditioning& rc) {
  std::vector<RegionSpec> out;
  for (const auto& r : rc.regions) out.push_back({r.kind, r.character_id, r.mask_ref, r.prompt, r.loras});
  return out;
}

int VideoJobRequest::frame_count() const {
  return static_cast<int>(std::max(depth_frames.size(), pose_frames.size()));
}

std::string_view job_kind_name(JobKind k) { return k == JobKind::kImage ? "image" : "video"; }

std::string_view job_status_name(JobStatus s) {
  switch (s) {
    case JobStatus::kQueued: return "queued";
    case JobStatus::kRunning: return "running";
    case JobStatus::kDone: return "done";
    case JobStatus::kFailed: return "failed";
  }
  return "?";
}

void validate(const ImageJobRequest& req, const AssetStore& store) {
  require_dims(req.width, req.height);
  require_ref(store, req.source_color, "source_color");
  require_ref(store, req.depth, "depth");
  int backgrounds = 0;
  for (const auto& r : req.regions) {
    require_ref(store, r.mask_ref, "mask");
    backgrounds += r.kind == style::RegionKind::kBackground;
  }
  if (backgrounds != 1 || req.regions.back().kind != style::RegionKind::kBackground) {
    invalid("regions must end with exactly one background region");
  }
  const auto& g = req.guidance;
  if (g.total_steps < 1 || g.skip_steps < 0 || g.skip_steps >= g.total_steps ||
      !(g.control_strength >= 0 && g.control_strength <= 1)) {
    invalid("guidance parameters out of range");
  }
  if (req.prompt.background_prompt.empty()) invalid("empty background prompt");
  require_size(load_rgb(store, req.source_color, "source_color"), req.width, req.height, "source_color",
               req.source_color);
  require_size(load_gray(store, req.depth, "depth"), req.width, req.height, "depth", req.depth);
  for (const auto& r : req.regions) {
    require_size(load_gray(store, r.mask_ref, "mask"), req.width, req.height, "mask", r.mask_ref);
  }
}

void validate(const VideoJobRequest& req, const AssetStore& store) {
  const int n = req.frame_count();
  if (n == 0) invalid("video request has no conditioning frames");
  if (n > kMaxVideoFrames) {
    fail(Errc::kFrameCountExceeded, std::to_string(n) + " frames requested, backend limit is " +
                                        std::to_string(kMaxVideoFrames));
  }
  if (!req.depth_frames.empty() && !req.pose_frames.empty() &&
      req.depth_frames.size() != req.pose_frames.size()) {
    invalid("depth has " + std::to_string(req.depth_frames.size()) + " frames but pose has " +
            std::to_string(req.pose_frames.size()));
  }
  if (!(req.fps > 0) || !std::isfinite(req.fps)) invalid("fps must be positive");
  if (!(req.conditioning_weight >= 0 && req.conditioning_weight <= 1)) {
    invalid("conditioning_weight must be in [0, 1]");
  }
  require_dims(req.width, req.height);
  if (req.prompt.background_prompt.empty()) invalid("empty background prompt");
  for (const auto& r : req.depth_frames) require_ref(store, r, "depth frame");
  for (const auto& r : req.pose_frames) require_ref(store, r, "pose frame");
  if (req.reference_image) {
    require_ref(store, *req.reference_image, "reference image");
    load_rgb(store, *req.reference_image, "reference image");
  }
  for (const auto& r : req.depth_frames) {
    require_size(load_gray(store, r, "depth frame"), req.width, req.height, "depth frame", r);
  }
  for (const auto& r : req.pose_frames) {
    require_size(load_rgb(store, r, "pose frame"), req.width, req.height, "pose frame", r);
  }
}

double stub_source_weight(const style::GuidanceParams& g) {
  const double skip_frac = std::min(1.0, 4.0 * g.skip_steps / g.total_steps);
  return g.control_strength * (0.6 + 0.4 * skip_frac) * (g.use_latent_blend ? 1.0 : 0.6);
}

ImageArtifact stub_generate_image(const ImageJobRequest& req, const AssetStore& store) {
  const RgbImage src = load_rgb(store, req.source_color, "source_color");
  const GrayImage depth = load_gray(store, req.depth, "depth");
  std::vector<GrayImage> alphas;
  std::vector<Palette> palettes;
  const std::uint64_t base = bundle_key(req.prompt);
  for (const auto& r : req.regions) {
    alphas.push_back(load_gray(store, r.mask_ref, "mask"));
    palettes.push_back(make_palette(base ^ fnv1a64(r.prompt) ^ mix64(fnv1a64(r.character_id))));
  }
  if (palettes.empty()) palettes.push_back(make_palette(base ^ fnv1a64(req.prompt.background_prompt)));

  const double w = stub_source_weight(req.guidance);
  ImageArtifact out{RgbImage(req.width, req.height), GrayImage(req.width, req.height)};
  for (int y = 0; y < req.height; ++y) {
    for (int x = 0; x < req.width; ++x) {
      const std::uint8_t* s = src.at(x, y);
      const double t = 0.5 * depth.at(x, y)[0] / 255.0 + 0.5 * luma(s);
      Color styl{0, 0, 0};
      double total = 0;
      int best = static_cast<int>(palettes.size()) - 1;
      int best_a = -1;
      for (std::size_t r = 0; r < alphas.size(); ++r) {
        const int a = alphas[r].at(x, y)[0];
        if (a > best_a) {
          best_a = a;
          best = static_cast<int>(r);
        }
        if (a == 0) continue;
        const Color c = palettes[r].at(t);
        for (int k = 0; k < 3; ++k) styl[k] += a * c[k];
        total += a;
      }
      if (total > 0) {
        for (auto& v : styl) v /= total;
      } else {
        styl = palettes.back().at(t);
      }
      std::uint8_t* o = out.image.at(x, y);
      for (int k = 0; k < 3; ++k) o[k] = to_byte(w * s[k] + (1 - w) * styl[k]);
      out.region_ids.at(x, y)[0] = static_cast<std::uint8_t>(best);
    }
  }
  return out;
}

std::optional<std::vector<RgbImage>> stub_generate_video(const VideoJobRequest& req,
                                                         const AssetStore& store,
                                                         const std::function<bool(int)>& on_frame) {
  const int n = req.frame_count();
  std::uint64_t key = bundle_key(req.prompt) ^ fnv1a64(req.prompt.background_prompt);
  if (req.prompt.motion_prompt) key ^= mix64(fnv1a64(*req.prompt.motion_prompt));
  const Palette pal = make_palette(key);
  std::optional<RgbImage> reference;
  if (req.reference_image) {
    reference = resize_nearest(load_rgb(store, *req.reference_image, "reference image"), req.width,
                               req.height);
  }
  const double cw = req.conditioning_weight;
  std::vector<RgbImage> frames;
  for (int i = 0; i < n; ++i) {
    std::optional<GrayImage> depth;
    std::optional<RgbImage> pose;
    if (!req.depth_frames.empty()) depth = load_gray(store, req.depth_frames[i], "depth frame");
    if (!req.pose_frames.empty()) pose = load_rgb(store, req.pose_frames[i], "pose frame");
    RgbImage img(req.width, req.height);
    for (int y = 0; y < req.height; ++y) {
      for (int x = 0; x < req.width; ++x) {
        const std::uint8_t* p = pose ? pose->at(x, y) : nullptr;
        const double d = depth ? depth->at(x, y)[0] / 255.0 : luma(p);
        Color structured = pal.at(d);
        if (p && (p[0] | p[1] | p[2])) {
          for (int k = 0; k < 3; ++k) structured[k] = 0.5 * structured[k] + 0.5 * p[k];
        }
        Color free_c;
        if (reference) {
          const std::uint8_t* r = reference->at(x, y);
          free_c = {double(r[0]), double(r[1]), double(r[2])};
        } else {
          const double u = static_cast<double>(x + y) / (req.width + req.height) + 0.01 * i;
          free_c = pal.at(u - std::floor(u));
        }
        std::uint8_t* o = img.at(x, y);
        for (int k = 0; k < 3; ++k) o[k] = to_byte(cw * structured[k] + (1 - cw) * free_c[k]);
      }
    }
    frames.push_back(std::move(img));
    if (on_frame && !on_frame(i)) return std::nullopt;
  }
  return frames;
}

std::string video_container(const VideoJobRequest& req, const std::vector<AssetRef>& frames) {
  wire::json list = wire::json::array();
  for (const auto& f : frames) list.push_back(f.uri());
  wire::json j = {{"schema", kVideoSchema},
                  {"fps", req.fps},
                  {"width", req.width},
                  {"height", req.height},
                  {"frame_count", frames.size()},
                  {"seed", req.prompt.seed},
                  {"frames", list}};
  return j.dump(2) + "\n";
}

// StubBackend

StubBackend::StubBackend(AssetStore& store, StubConfig config) : store_(store), config_(config) {
  // Ids outlive the backend inside project history, so they carry a per-instance tag.
  std::random_device rd;
  char tag[16];
  std::snprintf(tag, sizeof tag, "%08x", static_cast<unsigned>(rd()));
  tag_ = tag;
  if (config_.workers < 1) fail(Errc::kInvalidArgument, "stub backend needs at least one worker");
  for (int i = 0; i < config_.workers; ++i) workers_.emplace_back([this] { worker_loop(); });
}

StubBackend::~StubBackend() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  cv_.notify_all();
  for (auto& t : workers_) t.join();
}

std::string StubBackend::enqueue(JobKind kind, std::variant<ImageJobRequest, VideoJobRequest> req) {
  std::lock_guard lock(mutex_);
  char buf[48];
  std::snprintf(buf, sizeof buf, "job-%s-%06llu", tag_.c_str(), static_cast<unsigned long long>(next_id_++));
  Job job;
  job.record.job_id = buf;
  job.record.kind = kind;
  job.record.submitted_at_ms = now_ms();
  job.request = std::move(req);
  jobs_.emplace(buf, std::move(job));
  queue_.push_back(buf);
  cv_.notify_all();
  return buf;
}

std::string StubBackend::submit_image(const ImageJobRequest& req) {
  validate(req, store_);
  return enqueue(JobKind::kImage, req);
}

std::string StubBackend::submit_video(const VideoJobRequest& req) {
  validate(req, store_);
  return enqueue(JobKind::kVideo, req);
}

StubBackend::Job& StubBackend::find(const std::string& id) {
  const auto it = jobs_.find(id);
  if (it == jobs_.end()) fail(Errc::kUnknownJob, "unknown job '" + id + "'");
  return it->second;
}

void StubBackend::refresh_progress(Job& job) {
  if (job.record.status != JobStatus::kRunning || config_.latency.count() <= 0) return;
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - job.started).count();
  const double t = elapsed / std::chrono::duration<double>(config_.latency).count();
  job.record.progress = std::max(job.record.progress, std::min(0.99, t));
}

JobRecord StubBackend::poll(const std::string& id) {
  std::lock_guard lock(mutex_);
  Job& job = find(id);
  refresh_progress(job);
  return job.record;
}

std::vector<AssetRef> StubBackend::fetch_result(const std::string& id) {
  std::lock_guard lock(mutex_);
  const Job& job = find(id);
  if (job.record.status == JobStatus::kFailed) {
    fail(Errc::kJobFailed, "job '" + id + "' failed: " + job.record.reason);
  }
  if (job.record.status != JobStatus::kDone) fail(Errc::kNotDone, "job '" + id + "' is not done");
  return job.record.results;
}

bool StubBackend::cancel(const std::string& id) {
  std::lock_guard lock(mutex_);
  Job& job = find(id);
  if (job.record.terminal()) return false;
  if (job.record.status == JobStatus::kQueued) {
    queue_.erase(std::find(queue_.begin(), queue_.end(), id));
    job.record.status = JobStatus::kFailed;
    job.record.reason = "cancelled";
    return true;
  }
  job.cancel_requested = true;
  cv_.notify_all();
  return true;
}

std::vector<std::string> StubBackend::start_order() const {
  std::lock_guard lock(mutex_);
  return start_order_;
}

void StubBackend::worker_loop() {
  while (true) {
    std::string id;
    {
      std::unique_lock lock(mutex_);
      cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
      if (stopping_) return;
      id = queue_.front();
      queue_.pop_front();
    }
    run(id);
  }
}

void StubBackend::run(const std::string& id) {
  std::variant<ImageJobRequest, VideoJobRequest> req;
  {
    std::lock_guard lock(mutex_);
    Job& job = jobs_.at(id);
    job.record.status = JobStatus::kRunning;
    job.started = std::chrono::steady_clock::now();
    start_order_.push_back(id);
    req = job.request;
  }

  std::vector<AssetRef> results;
  std::vector<AssetRef> debug;
  std::string error;
  bool cancelled = false;
  try {
    if (const auto* image = std::get_if<ImageJobRequest>(&req)) {
      const ImageArtifact a = stub_generate_image(*image, store_);
      results.push_back(store_.put(encode_png(a.image), media::kPng));
      debug.push_back(store_.put(encode_png(a.region_ids), media::kPng));
    } else {
      const auto& video = std::get<VideoJobRequest>(req);
      const int n = video.frame_count();
      auto frames = stub_generate_video(video, store_, [&](int i) {
        std::lock_guard lock(mutex_);
        Job& job = jobs_.at(id);
        if (config_.latency.count() <= 0) {
          job.record.progress = std::max(job.record.progress, 0.99 * (i + 1) / n);
        }
        return !job.cancel_requested && !stopping_;
      });
      if (!frames) {
        cancelled = true;
      } else {
        for (const auto& f : *frames) results.push_back(store_.put(encode_png(f), media::kPng));
        results.push_back(store_.put_text(video_container(video, results), media::kVideo));
      }
    }
  } catch (const std::exception& e) {
    error = e.what();
  }

  std::unique_lock lock(mutex_);
  Job& job = jobs_.at(id);
  const auto deadline = job.started + config_.latency;
  cv_.wait_until(lock, deadline, [&] { return job.cancel_requested || stopping_; });
  if (cancelled || job.cancel_requested || stopping_) {
    job.record.status = JobStatus::kFailed;
    job.record.reason = "cancelled";
  } else if (!error.empty()) {
    job.record.status = JobStatus::kFailed;
    job.record.reason = error;
  } else {
    job.record.status = JobStatus::kDone;
    job.record.progress = 1.0;
    job.record.results = std::move(results);
    job.record.debug = std::move(debug);
  }
}

}  // namespace previz::gateway
