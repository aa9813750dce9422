// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

// previz-gen/1 over HTTP.
//
//   POST   /previz-gen/1/jobs              multipart: "manifest" + "asset-<sha256>" parts
//   GET    /previz-gen/1/jobs/<id>         job record
//   GET    /previz-gen/1/jobs/<id>/result  {"results":[...],"debug":[...]}
//   DELETE /previz-gen/1/jobs/<id>         {"cancelled":bool}
//   GET    /previz-gen/1/assets/<sha256>   raw bytes
//
// Errors are {"error":<Errc name>,"message":...} with 400 InvalidRequest,
// 404 UnknownJob/UnknownAsset, 409 NotDone, 410 JobFailed,
// 422 FrameCountExceeded.

#include <cstdlib>
#include <set>

#include "common/error.hpp"
#include "gateway/gateway.hpp"
#include "gateway/wire.hpp"
#include "httplib.h"

namespace previz::gateway {

using wire::json;

namespace {

constexpr const char* kPrefix = "/previz-gen/1";

int status_for(Errc c) {
  switch (c) {
    case Errc::kInvalidRequest: return 400;
    case Errc::kUnknownJob:
    case Errc::kUnknownAsset: return 404;
    case Errc::kNotDone: return 409;
    case Errc::kJobFailed: return 410;
    case Errc::kFrameCountExceeded: return 422;
    default: return 500;
  }
}

void send_error(httplib::Response& res, Errc c, const std::string& msg) {
  res.status = status_for(c);
  res.set_content(json{{"error", errc_name(c)}, {"message", msg}}.dump(), "application/json");
}

[[noreturn]] void rethrow_remote(const httplib::Result& res) {
  Errc code = Errc::kInternal;
  std::string msg = "backend returned HTTP " + std::to_string(res->status);
  try {
    const auto j = json::parse(res->body);
    const std::string name = j.at("error").get<std::string>();
    msg = j.value("message", msg);
    for (int i = 0; i <= static_cast<int>(Errc::kInternal); ++i) {
      if (errc_name(static_cast<Errc>(i)) == name) code = static_cast<Errc>(i);
    }
  } catch (...) {
  }
  fail(code, msg);
}

std::unique_ptr<httplib::Client> client_for(const std::string& url, std::chrono::milliseconds t) {
  auto cli = std::make_unique<httplib::Client>(url);
  const auto s = std::chrono::duration_cast<std::chrono::seconds>(t);
  const auto us = std::chrono::duration_cast<std::chrono::microseconds>(t - s);
  cli->set_connection_timeout(s.count(), us.count());
  cli->set_read_timeout(s.count(), us.count());
  cli->set_write_timeout(s.count(), us.count());
  return cli;
}

[[noreturn]] void unreachable(const std::string& url, httplib::Error err) {
  fail(Errc::kBackendUnreachable, "backend " + url + " unreachable: " + httplib::to_string(err));
}

std::vector<std::string> refs_of(const ImageJobRequest& r) {
  std::vector<std::string> out = {r.source_color, r.depth};
  for (const auto& x : r.regions) out.push_back(x.mask_ref);
  return out;
}

std::vector<std::string> refs_of(const VideoJobRequest& r) {
  std::vector<std::string> out = r.depth_frames;
  out.insert(out.end(), r.pose_frames.begin(), r.pose_frames.end());
  if (r.reference_image) out.push_back(*r.reference_image);
  return out;
}

}  // namespace

// RemoteBackend

RemoteBackend::RemoteBackend(AssetStore& store, std::string base_url, std::chrono::milliseconds timeout)
    : store_(store), base_url_(std::move(base_url)), timeout_(timeout) {}

std::string RemoteBackend::submit(const std::string& kind, const std::string& request_json,
                                  const std::vector<std::string>& refs) {
  httplib::MultipartFormDataItems items;
  const json manifest = {{"schema", kProtocol}, {"kind", kind}, {"request", json::parse(request_json)}};
  items.push_back({"manifest", manifest.dump(), "manifest.json", "application/json"});
  std::set<std::string> seen;
  for (const auto& ref : refs) {
    const auto hash = *parse_asset_uri(ref);
    if (!seen.insert(hash).second) continue;
    const auto bytes = store_.get(hash);
    const auto info = store_.stat(hash);
    items.push_back({"asset-" + hash, std::string(bytes.begin(), bytes.end()), hash, info->kind});
  }
  auto cli = client_for(base_url_, timeout_);
  auto res = cli->Post(std::string(kPrefix) + "/jobs", items);
  if (!res) unreachable(base_url_, res.error());
  if (res->status != 202) rethrow_remote(res);
  return json::parse(res->body).at("job_id").get<std::string>();
}

std::string RemoteBackend::submit_image(const ImageJobRequest& req) {
  validate(req, store_);
  return submit("image", to_json(req), refs_of(req));
}

std::string RemoteBackend::submit_video(const VideoJobRequest& req) {
  validate(req, store_);
  return submit("video", to_json(req), refs_of(req));
}

JobRecord RemoteBackend::poll(const std::string& id) {
  auto cli = client_for(base_url_, timeout_);
  auto res = cli->Get(std::string(kPrefix) + "/jobs/" + httplib::detail::encode_url(id));
  if (!res) unreachable(base_url_, res.error());
  if (res->status != 200) rethrow_remote(res);
  auto rec = job_record_from_json(res->body);
  // Records name their outputs; the bytes follow so callers can read them locally.
  if (rec.status == JobStatus::kDone) {
    pull(*cli, rec.results);
    pull(*cli, rec.debug);
  }
  return rec;
}

std::vector<AssetRef> RemoteBackend::fetch_result(const std::string& id) {
  auto cli = client_for(base_url_, timeout_);
  auto res = cli->Get(std::string(kPrefix) + "/jobs/" + httplib::detail::encode_url(id) + "/result");
  if (!res) unreachable(base_url_, res.error());
  if (res->status != 200) rethrow_remote(res);
  const auto j = json::parse(res->body);
  std::vector<AssetRef> out;
  for (const auto& r : j.at("results")) out.push_back(wire::decode_asset_ref(r));
  pull(*cli, out);
  return out;
}

void RemoteBackend::pull(httplib::Client& cli, const std::vector<AssetRef>& refs) {
  for (const auto& ref : refs) {
    if (store_.contains(ref.hash)) continue;
    auto blob = cli.Get(std::string(kPrefix) + "/assets/" + ref.hash);
    if (!blob) unreachable(base_url_, blob.error());
    if (blob->status != 200) rethrow_remote(blob);
    const auto got = store_.put_text(blob->body, ref.kind);
    if (got.hash != ref.hash) fail(Errc::kCorruptFile, "downloaded asset does not match " + ref.hash);
  }
}

bool RemoteBackend::cancel(const std::string& id) {
  auto cli = client_for(base_url_, timeout_);
  auto res = cli->Delete(std::string(kPrefix) + "/jobs/" + httplib::detail::encode_url(id));
  if (!res) unreachable(base_url_, res.error());
  if (res->status != 200) rethrow_remote(res);
  return json::parse(res->body).at("cancelled").get<bool>();
}

// GenServer

struct GenServer::Impl {
  httplib::Server server;
};

GenServer::GenServer(StubConfig config)
    : backend_(store_, config), impl_(std::make_unique<Impl>()) {
  auto& srv = impl_->server;
  auto guarded = [](auto fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const Error& e) {
        send_error(res, e.code(), e.what());
      } catch (const std::exception& e) {
        send_error(res, Errc::kInvalidRequest, e.what());
      }
    };
  };

  srv.Post(std::string(kPrefix) + "/jobs", guarded([this](const httplib::Request& req, httplib::Response& res) {
    if (!req.is_multipart_form_data() || !req.has_file("manifest")) {
      fail(Errc::kInvalidRequest, "expected multipart body with a manifest part");
    }
    for (const auto& [name, part] : req.files) {
      if (name == "manifest") continue;
      if (name.rfind("asset-", 0) != 0) fail(Errc::kInvalidRequest, "unexpected part '" + name + "'");
      const auto ref = store_.put_text(part.content, part.content_type.empty() ? media::kBinary
                                                                               : std::string_view(part.content_type));
      if ("asset-" + ref.hash != name) fail(Errc::kInvalidRequest, "part '" + name + "' does not match its hash");
    }
    json manifest;
    try {
      manifest = json::parse(req.get_file_value("manifest").content);
    } catch (const json::exception& e) {
      fail(Errc::kInvalidRequest, std::string("malformed manifest: ") + e.what());
    }
    if (manifest.value("schema", "") != kProtocol) fail(Errc::kInvalidRequest, "manifest schema must be previz-gen/1");
    const std::string kind = manifest.value("kind", "");
    std::string id;
    if (kind == "image") {
      id = backend_.submit_image(wire::decode_image_request(manifest.at("request")));
    } else if (kind == "video") {
      id = backend_.submit_video(wire::decode_video_request(manifest.at("request")));
    } else {
      fail(Errc::kInvalidRequest, "manifest kind must be image or video");
    }
    res.status = 202;
    res.set_content(json{{"job_id", id}}.dump(), "application/json");
  }));

  srv.Get(std::string(kPrefix) + "/jobs/([^/]+)", guarded([this](const httplib::Request& req, httplib::Response& res) {
    res.set_content(to_json(backend_.poll(req.matches[1])), "application/json");
  }));

  srv.Get(std::string(kPrefix) + "/jobs/([^/]+)/result",
          guarded([this](const httplib::Request& req, httplib::Response& res) {
            const std::string id = req.matches[1];
            const auto results = backend_.fetch_result(id);
            json r = json::array();
            for (const auto& a : results) r.push_back(wire::encode(a));
            json d = json::array();
            for (const auto& a : backend_.poll(id).debug) d.push_back(wire::encode(a));
            res.set_content(json{{"results", r}, {"debug", d}}.dump(), "application/json");
          }));

  srv.Delete(std::string(kPrefix) + "/jobs/([^/]+)",
             guarded([this](const httplib::Request& req, httplib::Response& res) {
               res.set_content(json{{"cancelled", backend_.cancel(req.matches[1])}}.dump(), "application/json");
             }));

  srv.Get(std::string(kPrefix) + "/assets/([0-9a-f]{64})",
          guarded([this](const httplib::Request& req, httplib::Response& res) {
            const std::string hash = req.matches[1];
            const auto info = store_.stat(hash);
            if (!info) fail(Errc::kUnknownAsset, "unknown asset " + hash);
            const auto bytes = store_.get(hash);
            res.set_content(std::string(bytes.begin(), bytes.end()), info->kind);
          }));
}

GenServer::~GenServer() { stop(); }

int GenServer::start(const std::string& host, int port) {
  auto& srv = impl_->server;
  const int bound = port == 0 ? srv.bind_to_any_port(host) : (srv.bind_to_port(host, port) ? port : -1);
  if (bound < 0) fail(Errc::kIoError, "cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([&srv] { srv.listen_after_bind(); });
  srv.wait_until_ready();
  return bound;
}

void GenServer::listen(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) fail(Errc::kIoError, "cannot listen on " + host + ":" + std::to_string(port));
}

void GenServer::stop() {
  impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

std::unique_ptr<Backend> make_backend(AssetStore& store, std::optional<std::string> spec, StubConfig stub) {
  if (!spec) {
    const char* env = std::getenv(std::string(kBackendEnv).c_str());
    spec = env && *env ? std::string(env) : std::string("stub");
  }
  if (*spec == "stub") return std::make_unique<StubBackend>(store, stub);
  if (spec->rfind("http://", 0) == 0) {
    return std::make_unique<RemoteBackend>(store, *spec);
  }
  fail(Errc::kInvalidArgument, "backend must be 'stub' or an http:// URL, got '" + *spec + "'");
}

}  // namespace previz::gateway
