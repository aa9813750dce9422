// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

#include "common/asset_store.hpp"

#include <mutex>

#include "common/error.hpp"
#include "common/hash.hpp"
#include "common/text.hpp"

namespace previz {

namespace fs = std::filesystem;

namespace {

bool is_hex_digest(std::string_view s) {
  if (s.size() != 64) return false;
  for (char c : s) {
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  }
  return true;
}

std::string key_of(std::string_view hash_or_uri) {
  auto h = parse_asset_uri(hash_or_uri);
  if (!h) fail(Errc::kUnknownAsset, "not an asset ref: '" + std::string(hash_or_uri) + "'");
  return *h;
}

}  // namespace

std::optional<std::string> parse_asset_uri(std::string_view uri) {
  if (uri.rfind("sha256:", 0) == 0) uri.remove_prefix(7);
  if (!is_hex_digest(uri)) return std::nullopt;
  return std::string(uri);
}

AssetStore::AssetStore() = default;

AssetStore::AssetStore(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(*dir_, ec);
  if (ec) fail(Errc::kIoError, "cannot create asset directory " + dir_->string());
  for (const auto& shard : fs::directory_iterator(*dir_)) {
    if (!shard.is_directory()) continue;
    for (const auto& f : fs::directory_iterator(shard.path())) {
      const std::string name = f.path().filename().string();
      if (!f.is_regular_file() || !is_hex_digest(name)) continue;
      Entry e;
      e.size = f.file_size();
      const fs::path meta = f.path().string() + ".kind";
      e.kind = fs::exists(meta) ? std::string(text::trim(text::read_file(meta.string())))
                                : std::string(media::kBinary);
      index_.emplace(name, std::move(e));
    }
  }
}

fs::path AssetStore::blob_path(const std::string& hash) const {
  return *dir_ / hash.substr(0, 2) / hash;
}

AssetRef AssetStore::put(std::span<const std::uint8_t> bytes, std::string_view kind) {
  AssetRef ref{sha256_hex(bytes), std::string(kind), bytes.size()};
  {
    std::shared_lock lock(mutex_);
    const auto it = index_.find(ref.hash);
    if (it != index_.end()) {
      ref.kind = it->second.kind;
      return ref;
    }
  }
  std::unique_lock lock(mutex_);
  const auto it = index_.find(ref.hash);
  if (it != index_.end()) {
    ref.kind = it->second.kind;
    return ref;
  }
  Entry e;
  e.kind = ref.kind;
  e.size = ref.size;
  if (dir_) {
    const fs::path p = blob_path(ref.hash);
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
    const fs::path tmp = p.string() + ".tmp";
    text::write_file(tmp.string(), std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
    text::write_file(p.string() + ".kind", ref.kind);
    fs::rename(tmp, p, ec);
    if (ec) fail(Errc::kIoError, "cannot store blob " + p.string());
  } else {
    e.bytes.assign(bytes.begin(), bytes.end());
  }
  index_.emplace(ref.hash, std::move(e));
  return ref;
}

AssetRef AssetStore::put_text(std::string_view s, std::string_view kind) {
  return put(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()), kind);
}

std::vector<std::uint8_t> AssetStore::get(std::string_view hash_or_uri) const {
  const std::string key = key_of(hash_or_uri);
  std::shared_lock lock(mutex_);
  const auto it = index_.find(key);
  if (it == index_.end()) fail(Errc::kUnknownAsset, "unknown asset " + key);
  if (!dir_) return it->second.bytes;
  const std::string raw = text::read_file(blob_path(key).string());
  std::vector<std::uint8_t> out(raw.begin(), raw.end());
  if (sha256_hex(out) != key) fail(Errc::kCorruptFile, "asset " + key + " does not match its hash");
  return out;
}

std::string AssetStore::get_text(std::string_view hash_or_uri) const {
  const auto b = get(hash_or_uri);
  return std::string(b.begin(), b.end());
}

std::optional<AssetRef> AssetStore::stat(std::string_view hash_or_uri) const {
  const auto key = parse_asset_uri(hash_or_uri);
  if (!key) return std::nullopt;
  std::shared_lock lock(mutex_);
  const auto it = index_.find(*key);
  if (it == index_.end()) return std::nullopt;
  return AssetRef{*key, it->second.kind, it->second.size};
}

std::size_t AssetStore::size() const {
  std::shared_lock lock(mutex_);
  return index_.size();
}

}  // namespace previz
