// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

// Content-addressed, immutable byte store keyed by SHA-256.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace previz {

namespace media {
inline constexpr std::string_view kPng = "image/png";
inline constexpr std::string_view kJson = "application/json";
inline constexpr std::string_view kText = "text/plain";
inline constexpr std::string_view kSkeleton = "text/x-previz-skel";
inline constexpr std::string_view kVideo = "application/x-previz-video+json";
inline constexpr std::string_view kBinary = "application/octet-stream";
}  // namespace media

struct AssetRef {
  std::string hash;  // lowercase hex sha256
  std::string kind;  // media type
  std::uint64_t size = 0;

  // "sha256:<hex>"
  std::string uri() const { return "sha256:" + hash; }

  friend bool operator==(const AssetRef&, const AssetRef&) = default;
};

// Accepts "sha256:<hex>" or a bare 64-digit hex digest.
std::optional<std::string> parse_asset_uri(std::string_view uri);

class AssetStore {
 public:
  // Memory-only store.
  AssetStore();
  // Directory-backed store; existing blobs under `dir` are indexed.
  explicit AssetStore(std::filesystem::path dir);

  AssetStore(const AssetStore&) = delete;
  AssetStore& operator=(const AssetStore&) = delete;

  AssetRef put(std::span<const std::uint8_t> bytes, std::string_view kind = media::kBinary);
  AssetRef put_text(std::string_view text, std::string_view kind = media::kText);

  // UnknownAsset when absent; CorruptFile when a blob on disk no longer
  // matches its name.
  std::vector<std::uint8_t> get(std::string_view hash_or_uri) const;
  std::string get_text(std::string_view hash_or_uri) const;

  std::optional<AssetRef> stat(std::string_view hash_or_uri) const;
  bool contains(std::string_view hash_or_uri) const { return stat(hash_or_uri).has_value(); }
  std::size_t size() const;
  const std::optional<std::filesystem::path>& directory() const { return dir_; }

 private:
  struct Entry {
    std::string kind;
    std::uint64_t size = 0;
    std::vector<std::uint8_t> bytes;  // memory-only stores
  };

  std::filesystem::path blob_path(const std::string& hash) const;

  std::optional<std::filesystem::path> dir_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, Entry> index_;
};

}  // namespace previz
