// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

// The /api/v1 HTTP service. Endpoints are listed in docs/api.md.

#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "common/asset_store.hpp"
#include "gateway/gateway.hpp"

namespace previz::service {

inline constexpr std::string_view kAssetDirEnv = "PREVIZ_ASSET_DIR";
inline constexpr std::string_view kPortEnv = "PREVIZ_PORT";
inline constexpr int kDefaultPort = 8740;

struct ServiceConfig {
  // Directory-backed asset store; memory-only when unset.
  std::optional<std::string> asset_dir;
  // "stub" or an http:// previz-gen/1 URL; PREVIZ_GEN_BACKEND when unset.
  std::optional<std::string> backend;
  gateway::StubConfig stub;
  // Relative save/open paths resolve here.
  std::string project_dir = ".";
  // Poll period of job event streams.
  std::chrono::milliseconds event_interval{50};
};

// Fills unset fields from the environment.
ServiceConfig config_from_env(ServiceConfig base = {});

class Service {
 public:
  explicit Service(ServiceConfig config = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds and serves on a background thread; returns the bound port.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  // Blocks on the calling thread.
  void listen(const std::string& host, int port);
  void stop();

  AssetStore& store();
  // Every registered endpoint as "METHOD /api/v1/...", with :name placeholders.
  const std::vector<std::string>& routes() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// HTTP status for an error code.
int http_status(Errc code);

}  // namespace previz::service
