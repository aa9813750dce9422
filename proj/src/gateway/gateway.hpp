// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

// Job-oriented client for image restyle and video generation backends, the
// deterministic in-process stub, and the previz-gen/1 wire protocol.

#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "common/asset_store.hpp"
#include "common/image.hpp"
#include "style/style.hpp"

namespace httplib {
class Client;
}

namespace previz::gateway {

inline constexpr std::string_view kProtocol = "previz-gen/1";
inline constexpr std::string_view kVideoSchema = "previz-video/1";
inline constexpr int kMaxVideoFrames = 81;
inline constexpr std::string_view kBackendEnv = "PREVIZ_GEN_BACKEND";

// Serializable view of a style::Region.
struct RegionSpec {
  style::RegionKind kind = style::RegionKind::kBackground;
  std::string character_id;
  std::string mask_ref;
  std::string prompt;
  std::vector<style::LoraRef> loras;

  friend bool operator==(const RegionSpec&, const RegionSpec&) = default;
};

std::vector<RegionSpec> region_specs(const style::RegionalConditioning& rc);

struct ImageJobRequest {
  std::string source_color;  // asset uri, RGB PNG
  std::string depth;         // asset uri, gray PNG
  std::vector<RegionSpec> regions;
  style::PromptBundle prompt;
  style::GuidanceParams guidance;
  int width = 512;
  int height = 288;

  friend bool operator==(const ImageJobRequest&, const ImageJobRequest&) = default;
};

struct VideoJobRequest {
  std::vector<std::string> depth_frames;  // gray PNG uris
  std::vector<std::string> pose_frames;   // RGB PNG uris
  std::optional<std::string> reference_image;
  style::PromptBundle prompt;
  style::VideoGuidanceMode mode = style::VideoGuidanceMode::kResemble;
  double conditioning_weight = 1.0;
  double fps = 16;
  int width = 512;
  int height = 288;

  int frame_count() const;
  friend bool operator==(const VideoJobRequest&, const VideoJobRequest&) = default;
};

enum class JobKind { kImage, kVideo };
enum class JobStatus { kQueued, kRunning, kDone, kFailed };

std::string_view job_kind_name(JobKind k);
std::string_view job_status_name(JobStatus s);

struct JobRecord {
  std::string job_id;
  JobKind kind = JobKind::kImage;
  JobStatus status = JobStatus::kQueued;
  double progress = 0;
  std::string reason;  // failed only
  std::int64_t submitted_at_ms = 0;  // unix epoch
  // Image: one PNG. Video: frame PNGs followed by the container manifest.
  std::vector<AssetRef> results;
  std::vector<AssetRef> debug;  // image jobs: region-id map

  bool terminal() const { return status == JobStatus::kDone || status == JobStatus::kFailed; }
  friend bool operator==(const JobRecord&, const JobRecord&) = default;
};

// Validation against the store the backend reads from. InvalidRequest names
// the offending ref; FrameCountExceeded above kMaxVideoFrames.
void validate(const ImageJobRequest& req, const AssetStore& store);
void validate(const VideoJobRequest& req, const AssetStore& store);

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string submit_image(const ImageJobRequest& req) = 0;
  virtual std::string submit_video(const VideoJobRequest& req) = 0;
  virtual JobRecord poll(const std::string& job_id) = 0;
  // NotDone unless the job finished successfully.
  virtual std::vector<AssetRef> fetch_result(const std::string& job_id) = 0;
  // False when the job already finished.
  virtual bool cancel(const std::string& job_id) = 0;
};

// Source-colour weight of the stub image blend; strictly decreasing along
// Strict, Faithful, Flexible, Loose.
double stub_source_weight(const style::GuidanceParams& g);

struct ImageArtifact {
  RgbImage image;
  GrayImage region_ids;  // index into req.regions of the dominant region
};

ImageArtifact stub_generate_image(const ImageJobRequest& req, const AssetStore& store);

// `on_frame(i)` runs after each frame; returning false aborts with nullopt.
std::optional<std::vector<RgbImage>> stub_generate_video(
    const VideoJobRequest& req, const AssetStore& store,
    const std::function<bool(int)>& on_frame = nullptr);

std::string video_container(const VideoJobRequest& req, const std::vector<AssetRef>& frames);

struct StubConfig {
  int workers = 1;
  std::chrono::milliseconds latency{0};
};

class StubBackend : public Backend {
 public:
  explicit StubBackend(AssetStore& store, StubConfig config = {});
  ~StubBackend() override;

  std::string submit_image(const ImageJobRequest& req) override;
  std::string submit_video(const VideoJobRequest& req) override;
  JobRecord poll(const std::string& job_id) override;
  std::vector<AssetRef> fetch_result(const std::string& job_id) override;
  bool cancel(const std::string& job_id) override;

  // Job ids in the order workers picked them up.
  std::vector<std::string> start_order() const;
  AssetStore& store() { return store_; }

 private:
  struct Job {
    JobRecord record;
    std::variant<ImageJobRequest, VideoJobRequest> request;
    bool cancel_requested = false;
    std::chrono::steady_clock::time_point started;
  };

  std::string enqueue(JobKind kind, std::variant<ImageJobRequest, VideoJobRequest> req);
  void worker_loop();
  void run(const std::string& id);
  Job& find(const std::string& id);
  void refresh_progress(Job& job);

  AssetStore& store_;
  StubConfig config_;
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<std::string> queue_;
  std::map<std::string, Job> jobs_;
  std::vector<std::string> start_order_;
  std::string tag_;
  std::uint64_t next_id_ = 1;
  bool stopping_ = false;
  std::vector<std::thread> workers_;
};

// previz-gen/1 client. Referenced assets are uploaded with each submit and
// results are downloaded into `store` on fetch.
class RemoteBackend : public Backend {
 public:
  RemoteBackend(AssetStore& store, std::string base_url,
                std::chrono::milliseconds timeout = std::chrono::seconds(30));

  std::string submit_image(const ImageJobRequest& req) override;
  std::string submit_video(const VideoJobRequest& req) override;
  JobRecord poll(const std::string& job_id) override;
  std::vector<AssetRef> fetch_result(const std::string& job_id) override;
  bool cancel(const std::string& job_id) override;

 private:
  void pull(httplib::Client& cli, const std::vector<AssetRef>& refs);
  std::string submit(const std::string& kind, const std::string& request_json,
                     const std::vector<std::string>& refs);

  AssetStore& store_;
  std::string base_url_;
  std::chrono::milliseconds timeout_;
};

// previz-gen/1 server around a StubBackend.
class GenServer {
 public:
  explicit GenServer(StubConfig config = {});
  ~GenServer();

  // Binds and serves on a background thread; returns the bound port.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  // Blocks serving on the calling thread.
  void listen(const std::string& host, int port);
  void stop();
  AssetStore& store() { return store_; }

 private:
  struct Impl;
  AssetStore store_;
  StubBackend backend_;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
};

// "stub" (default) or an http:// base URL, from PREVIZ_GEN_BACKEND unless
// `spec` is given.
std::unique_ptr<Backend> make_backend(AssetStore& store, std::optional<std::string> spec = std::nullopt,
                                      StubConfig stub = {});

// JSON encodings shared by the wire protocol and project files.
std::string to_json(const ImageJobRequest& req);
std::string to_json(const VideoJobRequest& req);
std::string to_json(const JobRecord& rec);
ImageJobRequest image_request_from_json(std::string_view json);
VideoJobRequest video_request_from_json(std::string_view json);
JobRecord job_record_from_json(std::string_view json);

}  // namespace previz::gateway
