// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

#include "service/service.hpp"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <thread>

#include "gateway/wire.hpp"
#include "httplib.h"
#include "json.hpp"
#include "project/codec.hpp"
#include "project/demo.hpp"
#include "project/pipeline.hpp"
#include "project/remix.hpp"
#include "service/args.hpp"

namespace previz::service {

using nlohmann::json;
using project::Project;
namespace codec = project::codec;
using args::frame_refs_json;
using args::legend_json;
using args::point_of;
using args::require_string;
using args::size_of;
using args::value_or;

namespace {

constexpr const char* kApi = "/api/v1";

// Raised for protocol failures that have no engine error code.
struct HttpFailure {
  int status;
  std::string error;
  std::string message;
};

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view error, const std::string& message) {
  send_json(res, {{"error", error}, {"message", message}}, status);
}

using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

Handler wrap(Handler fn) {
  return [fn = std::move(fn)](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      send_error(res, http_status(e.code()), errc_name(e.code()), e.what());
    } catch (const HttpFailure& f) {
      send_error(res, f.status, f.error, f.message);
    } catch (const json::exception& e) {
      send_error(res, 400, errc_name(Errc::kInvalidRequest), e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, errc_name(Errc::kInternal), e.what());
    }
  };
}

json body_of(const httplib::Request& req) { return args::parse_object(req.body); }

// Top-level keys of `patch` replace those of `base`; nulls are kept as values.
json overlay(json base, const json& patch) {
  for (auto it = patch.begin(); it != patch.end(); ++it) base[it.key()] = it.value();
  return base;
}

const std::string& param(const httplib::Request& req, const char* name) { return req.path_params.at(name); }

std::string etag(std::uint64_t version) { return "\"" + std::to_string(version) + "\""; }

std::optional<std::uint64_t> parse_etag(std::string v) {
  if (v.rfind("W/", 0) == 0) v = v.substr(2);
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) return std::nullopt;
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

json summary(const Project& p, std::uint64_t version) {
  return {{"id", p.id},
          {"name", p.name},
          {"version", version},
          {"scenes", p.scenes.size()},
          {"timelines", p.timelines.size()},
          {"skeletons", p.skeletons.size()},
          {"history", p.history.size()}};
}

scene::Scene& scene_ref(Project& p, const std::string& id) {
  for (auto& s : p.scenes) {
    if (s.id == id) return s;
  }
  fail(Errc::kUnknownId, "unknown scene '" + id + "'");
}

timeline::Timeline& timeline_ref(Project& p, const std::string& id) {
  for (auto& t : p.timelines) {
    if (t.id == id) return t;
  }
  fail(Errc::kUnknownId, "unknown timeline '" + id + "'");
}

const scene::Scene& scene_of(const Project& p, const timeline::Timeline& tl) {
  const auto* s = p.find_scene(tl.scene_id);
  if (!s) fail(Errc::kUnknownId, "timeline '" + tl.id + "' uses unknown scene '" + tl.scene_id + "'");
  return *s;
}

std::int64_t person_of(const std::string& text) {
  try {
    std::size_t used = 0;
    const auto id = std::stoll(text, &used);
    if (used == text.size()) return id;
  } catch (const std::exception&) {
  }
  fail(Errc::kInvalidRequest, "person id must be an integer");
}

scene::CameraPreset parse_preset(const std::string& name) {
  if (name == "wide") return scene::CameraPreset::kWide;
  if (name == "normal") return scene::CameraPreset::kNormal;
  if (name == "tele") return scene::CameraPreset::kTele;
  fail(Errc::kInvalidRequest, "unknown camera preset '" + name + "'");
}

// {"id", "preset"?, "transform"?, ...}: preset defaults, then explicit fields.
scene::Camera camera_from(json body) {
  const auto preset = parse_preset(value_or<std::string>(body, "preset", "normal"));
  const Transform pose = body.contains("transform") ? codec::decode_transform(body.at("transform")) : Transform{};
  body.erase("preset");
  return codec::decode_camera(
      overlay(codec::encode(scene::make_camera(require_string(body, "id"), preset, pose)), body));
}

}  // namespace

int http_status(Errc code) {
  switch (code) {
    case Errc::kOk: return 200;
    case Errc::kInvalidRequest:
    case Errc::kSchemaError:
    case Errc::kCorruptFile: return 400;
    case Errc::kUnknownId:
    case Errc::kUnknownJob:
    case Errc::kUnknownAsset:
    case Errc::kUnknownCharacterId: return 404;
    case Errc::kDuplicateId:
    case Errc::kStaleVersion:
    case Errc::kNotDone: return 409;
    case Errc::kJobFailed: return 410;
    case Errc::kBackendUnreachable: return 502;
    case Errc::kIoError:
    case Errc::kInternal: return 500;
    default: return 422;
  }
}

ServiceConfig config_from_env(ServiceConfig base) {
  if (!base.asset_dir) {
    if (const char* v = std::getenv(std::string(kAssetDirEnv).c_str()); v && *v) base.asset_dir = v;
  }
  if (!base.backend) {
    if (const char* v = std::getenv(std::string(gateway::kBackendEnv).c_str()); v && *v) base.backend = v;
  }
  return base;
}

struct Service::Impl {
  // One open project. Writers serialize on `write`; readers take a snapshot.
  struct Slot {
    std::mutex write;
    mutable std::mutex snap_mutex;
    std::shared_ptr<const Project> project;
    std::uint64_t version = 1;

    std::pair<std::shared_ptr<const Project>, std::uint64_t> snapshot() const {
      std::lock_guard lock(snap_mutex);
      return {project, version};
    }
    void publish(Project p, std::uint64_t v) {
      auto next = std::make_shared<const Project>(std::move(p));
      std::lock_guard lock(snap_mutex);
      project = std::move(next);
      version = v;
    }
  };

  ServiceConfig cfg;
  std::unique_ptr<AssetStore> store;
  std::unique_ptr<gateway::Backend> backend;
  httplib::Server server;
  std::thread thread;
  std::shared_mutex registry_mutex;
  std::map<std::string, std::shared_ptr<Slot>> projects;
  std::mutex owner_mutex;
  std::map<std::string, std::string> job_owner;  // job id -> project id
  std::atomic<bool> stopping{false};
  std::vector<std::string> table;  // "METHOD pattern"

  void on(const char* method, const std::string& pattern, httplib::Server::Handler h) {
    table.push_back(std::string(method) + " " + pattern);
    const std::string_view m = method;
    if (m == "GET") server.Get(pattern, std::move(h));
    else if (m == "POST") server.Post(pattern, std::move(h));
    else if (m == "PUT") server.Put(pattern, std::move(h));
    else if (m == "PATCH") server.Patch(pattern, std::move(h));
    else server.Delete(pattern, std::move(h));
  }

  explicit Impl(ServiceConfig c) : cfg(std::move(c)) {
    store = cfg.asset_dir ? std::make_unique<AssetStore>(*cfg.asset_dir) : std::make_unique<AssetStore>();
    backend = gateway::make_backend(*store, cfg.backend, cfg.stub);
    routes();
  }

  std::shared_ptr<Slot> slot(const std::string& pid) {
    std::shared_lock lock(registry_mutex);
    const auto it = projects.find(pid);
    if (it == projects.end()) fail(Errc::kUnknownId, "unknown project '" + pid + "'");
    return it->second;
  }

  std::pair<std::shared_ptr<const Project>, std::uint64_t> read(const std::string& pid, httplib::Response& res) {
    auto snap = slot(pid)->snapshot();
    res.set_header("ETag", etag(snap.second));
    return snap;
  }

  void add_project(Project p, httplib::Response& res) {
    if (p.id.empty()) fail(Errc::kInvalidRequest, "project id must not be empty");
    project::validate_project(p, store.get());
    auto s = std::make_shared<Slot>();
    const json out = summary(p, 1);
    s->publish(std::move(p), 1);
    {
      std::unique_lock lock(registry_mutex);
      if (!projects.emplace(out["id"].get<std::string>(), s).second) {
        fail(Errc::kDuplicateId, "project '" + out["id"].get<std::string>() + "' is already open");
      }
    }
    res.set_header("ETag", etag(1));
    send_json(res, out, 201);
  }

  static std::uint64_t expected_version(const httplib::Request& req) {
    if (!req.has_header("If-Match")) {
      throw HttpFailure{428, std::string(errc_name(Errc::kStaleVersion)), "writes require an If-Match header"};
    }
    const auto v = parse_etag(req.get_header_value("If-Match"));
    if (!v) fail(Errc::kInvalidRequest, "malformed If-Match header");
    return *v;
  }

  // Copy-on-write edit under the project's write lock. `fn` returns the
  // response body; the new version is added to it.
  void mutate(const httplib::Request& req, httplib::Response& res, const std::string& pid,
              const std::function<json(Project&)>& fn, int status = 200) {
    auto s = slot(pid);
    std::lock_guard lock(s->write);
    const auto [current, version] = s->snapshot();
    const auto expected = expected_version(req);
    if (expected != version) {
      fail(Errc::kStaleVersion, "project '" + pid + "' is at version " + std::to_string(version) +
                                    ", request was based on " + std::to_string(expected));
    }
    Project copy = *current;
    json out = fn(copy);
    project::validate_project(copy, store.get());
    s->publish(std::move(copy), version + 1);
    if (!out.is_object()) out = json::object();
    out["version"] = version + 1;
    res.set_header("ETag", etag(version + 1));
    send_json(res, out, status);
  }

  void own(const std::string& job_id, const std::string& pid) {
    std::lock_guard lock(owner_mutex);
    job_owner[job_id] = pid;
  }

  // Brings the owning project's history up to date with the backend.
  void sync_owner(const std::string& job_id) {
    std::string pid;
    {
      std::lock_guard lock(owner_mutex);
      const auto it = job_owner.find(job_id);
      if (it == job_owner.end()) return;
      pid = it->second;
    }
    std::shared_ptr<Slot> s;
    try {
      s = slot(pid);
    } catch (const Error&) {
      return;  // project closed
    }
    std::lock_guard lock(s->write);
    const auto [current, version] = s->snapshot();
    Project copy = *current;
    if (project::sync_jobs(copy, *backend)) s->publish(std::move(copy), version + 1);
  }

  gateway::JobRecord poll(const std::string& job_id) {
    auto rec = backend->poll(job_id);
    if (rec.terminal()) sync_owner(job_id);
    return rec;
  }

  std::string resolve(const std::string& path) const {
    const std::filesystem::path p(path);
    return p.is_absolute() ? path : (std::filesystem::path(cfg.project_dir) / p).string();
  }

  void routes();
  void project_routes();
  void scene_routes();
  void timeline_routes();
  void clip_routes();
  void skeleton_routes();
  void style_routes();
  void job_routes();
  void asset_routes();
};

void Service::Impl::routes() {
  const std::string api = kApi;
  on("GET", api + "/health", wrap([this](const httplib::Request&, httplib::Response& res) {
    send_json(res, {{"status", "ok"}, {"backend", cfg.backend.value_or("stub")}, {"assets", store->size()}});
  }));
  project_routes();
  scene_routes();
  timeline_routes();
  clip_routes();
  skeleton_routes();
  style_routes();
  job_routes();
  asset_routes();
}

void Service::Impl::project_routes() {
  const std::string base = std::string(kApi) + "/projects";

  on("GET", base, wrap([this](const httplib::Request&, httplib::Response& res) {
    json out = json::array();
    std::shared_lock lock(registry_mutex);
    for (const auto& [id, s] : projects) {
      const auto [p, v] = s->snapshot();
      out.push_back(summary(*p, v));
    }
    send_json(res, {{"projects", out}});
  }));

  on("POST", base, wrap([this](const httplib::Request& req, httplib::Response& res) {
    const json body = body_of(req);
    Project p;
    if (value_or(body, "demo", false)) {
      p = project::build_demo(*store);
      if (body.contains("id")) p.id = require_string(body, "id");
      if (body.contains("name")) p.name = body.at("name").get<std::string>();
    } else if (body.contains("project")) {
      p = codec::decode_project(body.at("project"));
    } else {
      p.id = require_string(body, "id");
      p.name = value_or<std::string>(body, "name", p.id);
    }
    add_project(std::move(p), res);
  }));

  on("POST", base + "/open", wrap([this](const httplib::Request& req, httplib::Response& res) {
    const json body = body_of(req);
    const std::string path = resolve(require_string(body, "path"));
    Project p = project::load_project(path);
    if (body.contains("id")) p.id = require_string(body, "id");
    const auto dir = project::asset_dir_for(path);
    if (std::filesystem::is_directory(dir)) {
      AssetStore disk{std::filesystem::path(dir)};
      project::copy_assets(p, disk, *store);
    }
    add_project(std::move(p), res);
  }));

  on("GET", base + "/:pid", wrap([this](const httplib::Request& req, httplib::Response& res) {
    const auto [p, v] = read(param(req, "pid"), res);
    send_json(res, {{"version", v}, {"project", codec::encode(*p)}});
  }));

  on("PUT", base + "/:pid", wrap([this](const httplib::Request& req, httplib::Response& res) {
    const json body = body_of(req);
    const std::string pid = param(req, "pid");
    mutate(req, res, pid, [&](Project& p) {
      Project next = codec::decode_project(body.contains("project") ? body.at("project") : body);
      if (next.id != pid) fail(Errc::kInvalidRequest, "project id cannot change");
      p = std::move(next);
      return json::object();
    });
  }));

  on("DELETE", base + "/:pid", wrap([this](const httplib::Request& req, httplib::Response& res) {
    const std::string pid = param(req, "pid");
    auto s = slot(pid);
    std::lock_guard lock(s->write);
    const auto expected = expected_version(req);
    if (expected != s->snapshot().second) fail(Errc::kStaleVersion, "project '" + pid + "' changed");
    std::unique_lock reg(registry_mutex);
    projects.erase(pid);
    send_json(res, {{"deleted", pid}});
  }));

  on("POST", base + "/:pid/save", wrap([this](const httplib::Request& req, httplib::Response& res) {
    const json body = body_of(req);
    const std::string pid = param(req, "pid");
    const auto [p, v] = read(pid, res);
    const std::string path = resolve(value_or<std::string>(body, "path", pid + ".previz"));
    project::validate_project(*p, store.get());
    AssetStore disk{std::filesystem::path(project::asset_dir_for(path))};
    const auto copied = project::copy_assets(*p, *store, disk);
    project::save_project(*p, path);
    send_json(res, {{"path", path}, {"version", v}, {"assets_copied", copied},
                    {"asset_dir", project::asset_dir_for(path)}});
  }));

  on("GET", base + "/:pid/validate", wrap([this](const httplib::Request& req, httplib::Response& res) {
    const auto [p, v] = read(param(req, "pid"), res);
    try {
      project::validate_project(*p, store.get());
      send_json(res, {{"valid", true}, {"version", v}});
    } catch (const Error& e) {
      send_json(res, {{"valid", false}, {"version", v}, {"error", errc_name(e.code())}, {"message", e.what()}});
    }
  }));
}

void Service::Impl::scene_routes() {
  const std::string base = std::string(kApi) + "/projects/:pid/scenes";

  on("POST", base, wrap([this](const httplib::Request& req, httplib::Response& res) {
    const json body = body_of(req);
    mutate(req, res, param(req, "pid"), [&](Project& p) {
      // Cameras may use the preset shorthand accepted by the cameras endpoint.
      json doc = body;
      if (doc.contains("cameras")) {
        for (auto& c : doc.at("cameras")) c = codec::encode(camera_from(c));
      }
      auto s = codec::decode_scene(overlay(codec::encode(scene::Scene{}), doc));
      if (s.id.empty()) fail(Errc::kInvalidRequest, "scene id must not be empty");
      if (p.find_scene(s.id)) fail(Errc::kDuplicateId, "scene '" + s.id + "' exists");
      const std::string id = s.id;
      p.scenes.push_back(std::move(s));
      return json{{"id", id}};
    }, 201);
  }));

  on("GET", base + "/:sid", wrap([this](const httplib::Request& req, httplib::Response& res) {
    const auto [p, v] = read(param(req, "pid"), res);
    const auto* s = p->find_scene(param(req, "sid"));
    if (!s) fail(Errc::kUnknownId, "unknown scene '" + param(req, "sid") + "'");
    send_json(res, {{"version", v}, {"scene", codec::encode(*s)}});
  }));

  on("POST", base + "/:sid/entities", wrap([this](const httplib::Request& req, httplib::Response& res) {
    json body = body_of(req);
    if (body.contains("rig") && body.at("rig").is_string()) {
      if (body.at("rig") != "humanoid") fail(Errc::kInvalidRequest, "unknown rig preset");
      scene::SceneEntity tmp;
      tmp.rig = scene::humanoid_rig(value_or(body, "rig_height", 1.75));
      body["rig"] = codec::encode(tmp).at("rig");
    }
    body.erase("rig_height");
    mutate(req, res, param(req, "pid"), [&](Project& p) {
      auto& s = scene_ref(p, param(req, "sid"));
      scene::SceneEntity base_entity;
      base_entity.raster_id = 0;
      auto spec = codec::decode_entity(overlay(codec::encode(base_entity), body));
      auto [next, id] = scene::add_entity(s, std::move(spec));
      s = std::move(next);
      return json{{"id", id}, {"raster_id", s.find_entity(id)->raster_id}};
    }, 201);
  }));

  on("DELETE", base + "/:sid/entities/:eid", wrap([this](const httplib::Request& req, httplib::Response& res) {
    mutate(req, res, param(req, "pid"), [&](Project& p) {
      auto& s = scene_ref(p, param(req, "sid"));
      s = scene::remove_entity(s, param(req, "eid"));
      return json{{"deleted", param(req, "eid")}};
    });
  }));

  on("POST", base + "/:sid/cameras", wrap([this](const httplib::Request& req, httplib::Response& res) {
    const json body = body_of(req);
    mutate(req, res, param(req, "pid"), [&](Project& p) {
      auto& s = scene_ref(p, param(req, "sid"));
      const auto cam = camera_from(body);
      s = scene::add_camera(s, cam);
      return json{{"id", cam.id}};
    }, 201);
  }));

  on("PUT", base + "/:sid/cameras/:cid", wrap([this](const httplib::Request& req, httplib::Response& res) {
    const json body = body_of(req);
    mutate(req, res, param(req, "pid"), [&](Project& p) {
      auto& s = scene_ref(p, param(req, "sid"));
      const auto* cur = s.find_camera(param(req, "cid"));
      if (!cur) fail(Errc::kUnknownId, "unknown camera '" + param(req, "cid") + "'");
      auto cam = codec::decode_camera(overlay(codec::encode(*cur), body));
      if (cam.id != cur->id) fail(Errc::kInvalidRequest, "camera id cannot change");
      s = scene::update_camera(s, cam);
      return json{{"id", cam.id}};
    });
  }));

  on("POST", base + "/:sid/lights", wrap([this](const httplib::Request& req, httplib::Response& res) {
    const json body = body_of(req);
    mutate(req, res, param(req, "pid"), [&](Project& p) {
      auto& s = scene_ref(p, param(req, "sid"));
      auto light = codec::decode_light(overlay(codec::encode(scene::Light{}), body));
      s = scene::add_light(s, light);
      return json{{"id", light.id}};
    }, 201);
  }));

  on("PUT", base + "/:sid/transforms/:nid", wrap([this](const httplib::Request& req, httplib::Response& res) {
    const json body = body_of(req);
    mutate(req, res, param(req, "pid"), [&](Project& p) {
      auto& s = scene_ref(p, param(req, "sid"));
      s = scene::set_transform(s, param(req, "nid"),
                               codec::decode_transform(overlay(codec::encode(Transform{}), body)));
      return json{{"id", param(req, "nid")}};
    });
  }));

  on("PATCH", base + "/:sid/appearance/:nid", wrap([this](const httplib::Request& req, httplib::Response& res) {
    const json body = body_of(req);
    mutate(req, res, param(req, "pid"), [&](Project& p) {
      auto& s = scene_ref(p, param(req, "sid"));
      scene::AppearanceUpdate u;
      if (body.contains("color")) u.color = codec::decode_rgb(body.at("color"));
      if (body.contains("intensity")) u.intensity = body.at("intensity").get<double>();
      s = scene::set_appearance(s, param(req, "nid"), u);
      return json{{"id", param(req, "nid")}};
    });
  }));
}

void Service::Impl::timeline_routes() {
  const std::string base = std::string(kApi) + "/projects/:pid/timelines";

  on("POST", base, wrap([this](const httplib::Request& req, httplib::Response& res) {
    const json body = body_of(req);
    mutate(req, res, param(req, "pid"), [&](Project& p) {
      auto tl = codec::decode_timeline(overlay(codec::encode(timeline::Timeline{}), body));
      if (tl.id.empty()) fail(Errc::kInvalidRequest, "timeline id must not be empty");
      if (p.find_timeline(tl.id)) fail(Errc::kDuplicateId, "timeline '" + tl.id + "' exists");
      const std::string id = tl.id;
      p.timelines.push_back(std::move(tl));
      return json{{"id", id}};
    }, 201);
  }));

  on("GET", base + "/:tid", wrap([this](const httplib::Request& req, httplib::Response& res) {
    const auto [p, v] = read(param(req, "pid"), res);
    const auto* tl = p->find_timeline(param(req, "tid"));
    if (!tl) fail(Errc::kUnknownId, "unknown timeline '" + param(req, "tid") + "'");
    send_json(res, {{"version", v}, {"timeline", codec::encode(*tl)}});
  }));

  on("POST", base + "/:tid/tracks", wrap([this](const httplib::Request& req, httplib::Response& res) {
    const json body = body_of(req);
    mutate(req, res, param(req, "pid"), [&](Project& p) {
      auto& tl = timeline_ref(p, param(req, "tid"));
      auto track = codec::decode_track(overlay(codec::encode(timeline::Track{}), body));
      tl = timeline::add_track(tl, scene_of(p, tl), track);
      return json{{"id", track.id}};
    }, 201);
  }));

  on("POST", base + "/:tid/tracks/:trid/keyframes",
              wrap([this](const httplib::Request& req, httplib::Response& res) {
                const json body = body_of(req);
                mutate(req, res, param(req, "pid"), [&](Project& p) {
                  auto& tl = timeline_ref(p, param(req, "tid"));
                  const auto kf = codec::decode_keyframe(overlay({{"easing", "linear"}}, body));
                  tl = timeline::add_track_keyframe(tl, param(req, "trid"), kf);
                  return json{{"keyframes", tl.find_track(param(req, "trid"))->keyframes.size()}};
                }, 201);
              }));

  on("POST", base + "/:tid/tracks/:trid/paths", wrap([this](const httplib::Request& req, httplib::Response& res) {
    const json body = body_of(req);
    mutate(req, res, param(req, "pid"), [&](Project& p) {
      auto& tl = timeline_ref(p, param(req, "tid"));
      const auto* track = tl.find_track(param(req, "trid"));
      if (!track) fail(Errc::kUnknownId, "unknown track '" + param(req, "trid") + "'");
      timeline::MotionPath path;
      if (body.contains("record")) {
        const json& r = body.at("record");
        std::vector<timeline::InputEvent> events;
        for (const auto& e : r.at("events")) {
          const auto key = e.at("key").get<std::string>();
          if (key.size() != 1) fail(Errc::kInvalidRequest, "key must be one character");
          events.push_back({e.at("t").get<double>(), key[0], e.value("down", true)});
        }
        timeline::RecordOptions opt;
        opt.entity_id = value_or(r, "entity_id", track->target_id);
        if (r.contains("start")) opt.start = codec::decode_vec3(r.at("start"));
        opt.start_yaw = value_or(r, "start_yaw", 0.0);
        opt.sample_hz = value_or(r, "sample_hz", opt.sample_hz);
        path = timeline::record_motion_path(events, value_or(r, "speed", 1.0), opt);
      } else {
        json j = overlay({{"source", "authored"}}, body);
        if (!j.contains("entity_id")) j["entity_id"] = track->target_id;
        path = codec::decode_path(j);
      }
      const auto samples = path.samples.size();
      tl = timeline::add_motion_path(tl, param(req, "trid"), std::move(path));
      return json{{"samples", samples}};
    }, 201);
  }));

  on("POST", base + "/:tid/clips", wrap([this](const httplib::Request& req, httplib::Response& res) {
    const json body = body_of(req);
    mutate(req, res, param(req, "pid"), [&](Project& p) {
      auto& tl = timeline_ref(p, param(req, "tid"));
      auto clip = codec::decode_clip(overlay(codec::encode(timeline::Clip{}), body));
      if (p.timeline_of_clip(clip.id)) fail(Errc::kDuplicateId, "clip '" + clip.id + "' exists");
      tl = timeline::add_clip(tl, scene_of(p, tl), clip);
      return json{{"id", clip.id}, {"frames", clip.frame_count()}};
    }, 201);
  }));

  on("PUT", base + "/:tid/clips/:cid", wrap([this](const httplib::Request& req, httplib::Response& res) {
    const json body = body_of(req);
    mutate(req, res, param(req, "pid"), [&](Project& p) {
      auto& tl = timeline_ref(p, param(req, "tid"));
      const auto* cur = tl.find_clip(param(req, "cid"));
      if (!cur) fail(Errc::kUnknownId, "unknown clip '" + param(req, "cid") + "'");
      auto clip = codec::decode_clip(overlay(codec::encode(*cur), body));
      if (clip.id != cur->id) fail(Errc::kInvalidRequest, "clip id cannot change");
      tl = timeline::replace_clip(tl, scene_of(p, tl), clip);
      return json{{"id", clip.id}, {"frames", clip.frame_count()}};
    });
  }));

  on("DELETE", base + "/:tid/clips/:cid", wrap([this](const httplib::Request& req, httplib::Response& res) {
    mutate(req, res, param(req, "pid"), [&](Project& p) {
      auto& tl = timeline_ref(p, param(req, "tid"));
      tl = timeline::remove_clip(tl, param(req, "cid"));
      return json{{"deleted", param(req, "cid")}};
    });
  }));

  on("GET", base + "/:tid/plan", wrap([this](const httplib::Request& req, httplib::Response& res) {
    const auto [p, v] = read(param(req, "pid"), res);
    const auto* tl = p->find_timeline(param(req, "tid"));
    if (!tl) fail(Errc::kUnknownId, "unknown timeline '" + param(req, "tid") + "'");
    auto number = [&](const char* key, double fallback) {
      if (!req.has_param(key)) return fallback;
      try {
        return std::stod(req.get_param_value(key));
      } catch (const std::exception&) {
        fail(Errc::kInvalidRequest, std::string("query parameter '") + key + "' is not a number");
      }
    };
    double end = 0;
    for (const auto& c : tl->clips) end = std::max(end, c.t_out);
    const auto plan = timeline::compose_sequence(*tl, scene_of(*p, *tl), number("t0", 0), number("t1", end),
                                                 number("fps", timeline::kDefaultFps));
    json out = args::plan_json(plan);
    out["version"] = v;
    send_json(res, out);
  }));
}

void Service::Impl::clip_routes() {
  const std::string base = std::string(kApi) + "/projects/:pid/clips/:cid";

  on("POST", base + "/capture", wrap([this](const httplib::Request& req, httplib::Response& res) {
    const json body = body_of(req);
    const auto [p, v] = read(param(req, "pid"), res);
    const auto plan = project::plan_clip(*p, param(req, "cid"));
    const int index = value_or(body, "frame", 0);
    const auto frame = project::capture(*p, param(req, "cid"), index, size_of(body));
    const double t = plan.frames.at(static_cast<std::size_t>(index)).t;
    json out = frame_refs_json(project::store_frame(frame, index, t, *store));
    out["legend"] = legend_json(frame.legend);
    out["version"] = v;
    send_json(res, out);
  }));

  on("POST", base + "/render", wrap([this](const httplib::Request& req, httplib::Response& res) {
    const json body = body_of(req);
    const auto [p, v] = read(param(req, "pid"), res);
    project::RenderOptions opt;
    opt.size = size_of(body);
    if (body.contains("fps") && !body.at("fps").is_null()) opt.fps = body.at("fps").get<double>();
    json out = args::rendered_json(project::render_clip(*p, param(req, "cid"), *store, opt));
    out["version"] = v;
    send_json(res, out);
  }));

  on("POST", base + "/restyle", wrap([this](const httplib::Request& req, httplib::Response& res) {
    const json body = body_of(req);
    const std::string pid = param(req, "pid");
    const std::string cid = param(req, "cid");
    const auto opt = args::restyle_options(body);
    mutate(req, res, pid, [&](Project& p) {
      const auto prep = project::prepare_restyle(p, cid, opt, *store);
      const auto& h = project::submit(p, *backend, cid, prep);
      own(h.job.job_id, pid);
      return json{{"job_id", h.job.job_id},
                  {"request", prep.request_ref.uri()},
                  {"source", frame_refs_json(prep.source)},
                  {"guidance", gateway::wire::encode(prep.request.guidance)}};
    }, 202);
  }));

  on("POST", base + "/generate", wrap([this](const httplib::Request& req, httplib::Response& res) {
    const json body = body_of(req);
    const std::string pid = param(req, "pid");
    const std::string cid = param(req, "cid");
    const auto opt = args::generate_options(body);
    mutate(req, res, pid, [&](Project& p) {
      const auto prep = project::prepare_generate(p, cid, opt, *store);
      const auto& h = project::submit(p, *backend, cid, prep);
      own(h.job.job_id, pid);
      return json{{"job_id", h.job.job_id},
                  {"request", prep.request_ref.uri()},
                  {"frames", prep.request.frame_count()},
                  {"conditioning_weight", prep.request.conditioning_weight},
                  {"conditioning", prep.conditioning.manifest.uri()}};
    }, 202);
  }));
}

void Service::Impl::skeleton_routes() {
  const std::string base = std::string(kApi) + "/projects/:pid/skeletons";

  on("POST", base, wrap([this](const httplib::Request& req, httplib::Response& res) {
    const json body = body_of(req);
    const std::string document = body.contains("document") ? body.at("document").get<std::string>()
                                                           : store->get_text(require_string(body, "asset"));
    mutate(req, res, param(req, "pid"), [&](Project& p) {
      const std::string id = require_string(body, "id");
      const auto imported = project::import_skeleton(p, *store, id, value_or(body, "name", id), document);
      json out = args::sequence_json(imported.sequence);
      out["id"] = id;
      out["warnings"] = imported.warnings;
      out["sequence"] = imported.entry->sequence.uri();
      return out;
    }, 201);
  }));

  on("GET", base + "/:skid", wrap([this](const httplib::Request& req, httplib::Response& res) {
    const auto [p, v] = read(param(req, "pid"), res);
    const auto* e = p->find_skeleton(param(req, "skid"));
    if (!e) fail(Errc::kUnknownId, "unknown skeleton '" + param(req, "skid") + "'");
    send_json(res, {{"version", v},
                    {"skeleton", codec::encode(*e)},
                    {"sequence", args::sequence_json(project::load_sequence(*e, *store))}});
  }));

  on("POST", base + "/:skid/crop", wrap([this](const httplib::Request& req, httplib::Response& res) {
    const json body = body_of(req);
    mutate(req, res, param(req, "pid"), [&](Project& p) {
      const auto cropped = project::crop_skeleton(p, *store, param(req, "skid"), body.at("t0").get<double>(),
                                                  body.at("t1").get<double>());
      json out = args::sequence_json(cropped);
      out["sequence"] = project::skeleton_entry(p, param(req, "skid")).sequence.uri();
      return out;
    });
  }));

  on("POST", base + "/:skid/split", wrap([this](const httplib::Request& req, httplib::Response& res) {
    mutate(req, res, param(req, "pid"), [&](Project& p) {
      project::split_skeleton(p, *store, param(req, "skid"));
      json persons = json::array();
      for (const auto& l : project::skeleton_entry(p, param(req, "skid")).layers) persons.push_back(l.person_id);
      return json{{"layers", persons}};
    });
  }));

  on("POST", base + "/:skid/layers/:person/transform",
              wrap([this](const httplib::Request& req, httplib::Response& res) {
                const json body = body_of(req);
                mutate(req, res, param(req, "pid"), [&](Project& p) {
                  const auto person = person_of(param(req, "person"));
                  std::optional<skeleton::Point2> anchor;
                  if (body.contains("anchor") && !body.at("anchor").is_null()) anchor = point_of(body.at("anchor"), {});
                  const auto flagged = project::transform_skeleton_layer(
                      p, param(req, "skid"), person, point_of(body.value("translate", json()), {}),
                      value_or(body, "scale", 1.0), anchor);
                  json out = json::array();
                  for (const auto& f : flagged) out.push_back({f.frame, f.joint});
                  const auto& layer = project::skeleton_layer(project::skeleton_entry(p, param(req, "skid")), person);
                  return json{{"flagged", out}, {"placement", codec::encode(layer).at("placement")}};
                });
              }));

  on("POST", base + "/:skid/layers/:person/blend",
              wrap([this](const httplib::Request& req, httplib::Response& res) {
                const json body = body_of(req);
                mutate(req, res, param(req, "pid"), [&](Project& p) {
                  project::BlendTarget target;
                  target.timeline_id = require_string(body, "timeline_id");
                  target.track_id = require_string(body, "track_id");
                  target.camera_id = require_string(body, "camera_id");
                  target.path_index = value_or<std::size_t>(body, "path_index", 0);
                  target.size = size_of(body);
                  if (body.contains("root_offset")) target.root_offset = codec::decode_vec3(body.at("root_offset"));
                  if (body.contains("fps")) target.fps = body.at("fps").get<double>();
                  const auto person = person_of(param(req, "person"));
                  project::blend_skeleton_layer(p, param(req, "skid"), person, target);
                  const auto& layer = project::skeleton_layer(project::skeleton_entry(p, param(req, "skid")), person);
                  return json{{"frames", layer.frames.size()}, {"fps", layer.fps}};
                });
              }));

  on("POST", base + "/:skid/recomposite", wrap([this](const httplib::Request& req, httplib::Response& res) {
    const json body = body_of(req);
    mutate(req, res, param(req, "pid"), [&](Project& p) {
      const auto out_seq = project::recomposite_skeleton(p, *store, param(req, "skid"),
                                                         value_or(body, "fps", timeline::kDefaultFps),
                                                         body.at("duration").get<double>());
      json out = args::sequence_json(out_seq);
      out["output"] = project::skeleton_entry(p, param(req, "skid")).output->uri();
      return out;
    });
  }));
}

void Service::Impl::style_routes() {
  const std::string api = kApi;

  on("GET", api + "/projects/:pid/styles", wrap([this](const httplib::Request& req, httplib::Response& res) {
    const auto [p, v] = read(param(req, "pid"), res);
    send_json(res, {{"version", v},
                    {"overrides", codec::encode(p->style_overrides)},
                    {"effective", codec::encode(project::effective_styles(*p))}});
  }));

  on("PUT", api + "/projects/:pid/styles", wrap([this](const httplib::Request& req, httplib::Response& res) {
    const json body = body_of(req);
    mutate(req, res, param(req, "pid"), [&](Project& p) {
      p.style_overrides = codec::decode_styles(overlay({{"styles", json::array()}, {"characters", json::array()}}, body));
      return json::object();
    });
  }));

  on("POST", api + "/prompt/compose", wrap([](const httplib::Request& req, httplib::Response& res) {
    const json body = body_of(req);
    const auto bundle = style::compose_prompt(args::fields_from_json(body.value("fields", body)));
    send_json(res, {{"bundle", gateway::wire::encode(bundle)}});
  }));

  on("GET", api + "/resemblance", wrap([](const httplib::Request& req, httplib::Response& res) {
    int steps = style::kReferenceSteps;
    if (req.has_param("total_steps")) {
      try {
        steps = std::stoi(req.get_param_value("total_steps"));
      } catch (const std::exception&) {
        fail(Errc::kInvalidRequest, "total_steps is not an integer");
      }
    }
    json levels = json::array();
    for (const auto level : style::kAllLevels) {
      if (req.has_param("level") && req.get_param_value("level") != style::level_name(level)) continue;
      json g = gateway::wire::encode(style::resemblance_params(level, steps));
      g["level"] = style::level_name(level);
      levels.push_back(g);
    }
    if (levels.empty()) fail(Errc::kInvalidRequest, "unknown resemblance level");
    send_json(res, {{"levels", levels}});
  }));
}

void Service::Impl::job_routes() {
  const std::string base = std::string(kApi) + "/jobs/:jid";

  on("GET", base, wrap([this](const httplib::Request& req, httplib::Response& res) {
    send_json(res, gateway::wire::encode(poll(param(req, "jid"))));
  }));

  on("GET", base + "/result", wrap([this](const httplib::Request& req, httplib::Response& res) {
    const auto refs = backend->fetch_result(param(req, "jid"));
    sync_owner(param(req, "jid"));
    json out = json::array();
    for (const auto& r : refs) out.push_back(gateway::wire::encode(r));
    send_json(res, {{"results", out}});
  }));

  on("DELETE", base, wrap([this](const httplib::Request& req, httplib::Response& res) {
    send_json(res, {{"cancelled", backend->cancel(param(req, "jid"))}});
  }));

  on("GET", base + "/events", wrap([this](const httplib::Request& req, httplib::Response& res) {
    const std::string id = param(req, "jid");
    backend->poll(id);  // UnknownJob up front, before the stream starts
    struct State {
      int seq = 0;
      std::optional<std::pair<gateway::JobStatus, double>> last;
    };
    auto state = std::make_shared<State>();
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider("text/event-stream", [this, id, state](std::size_t, httplib::DataSink& sink) {
      auto emit = [&](std::string_view event, const json& data) {
        const std::string msg = "id: " + std::to_string(state->seq++) + "\nevent: " + std::string(event) +
                                "\ndata: " + data.dump() + "\n\n";
        return sink.write(msg.data(), msg.size());
      };
      while (!stopping && sink.is_writable()) {
        gateway::JobRecord rec;
        try {
          rec = poll(id);
        } catch (const Error& e) {
          emit("failed", {{"job_id", id}, {"status", "failed"}, {"reason", e.what()}});
          sink.done();
          return true;
        }
        const json data = {{"job_id", id},
                           {"status", gateway::job_status_name(rec.status)},
                           {"progress", rec.progress},
                           {"reason", rec.reason}};
        const auto key = std::make_pair(rec.status, rec.progress);
        if (!state->last || *state->last != key) {
          state->last = key;
          if (!emit("progress", data)) return false;
        }
        if (rec.terminal()) {
          emit(rec.status == gateway::JobStatus::kDone ? "done" : "failed", data);
          sink.done();
          return true;
        }
        std::this_thread::sleep_for(cfg.event_interval);
      }
      return false;
    });
  }));
}

void Service::Impl::asset_routes() {
  const std::string base = std::string(kApi) + "/assets";

  on("POST", base, wrap([this](const httplib::Request& req, httplib::Response& res) {
    std::string kind = req.get_header_value("Content-Type");
    if (kind.empty()) kind = std::string(media::kBinary);
    const auto ref = store->put(
        std::span(reinterpret_cast<const std::uint8_t*>(req.body.data()), req.body.size()), kind);
    send_json(res, gateway::wire::encode(ref), 201);
  }));

  on("GET", base + "/:hash", wrap([this](const httplib::Request& req, httplib::Response& res) {
    const auto info = store->stat(param(req, "hash"));
    if (!info) fail(Errc::kUnknownAsset, "unknown asset '" + param(req, "hash") + "'");
    const auto bytes = store->get(info->hash);
    res.set_header("ETag", "\"" + info->hash + "\"");
    res.set_content(std::string(bytes.begin(), bytes.end()), info->kind);
  }));
}

Service::Service(ServiceConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

Service::~Service() { stop(); }

int Service::start(const std::string& host, int port) {
  auto& srv = impl_->server;
  const int bound = port == 0 ? srv.bind_to_any_port(host) : (srv.bind_to_port(host, port) ? port : -1);
  if (bound < 0) fail(Errc::kIoError, "cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([&srv] { srv.listen_after_bind(); });
  srv.wait_until_ready();
  return bound;
}

void Service::listen(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) {
    fail(Errc::kIoError, "cannot listen on " + host + ":" + std::to_string(port));
  }
}

void Service::stop() {
  if (!impl_) return;
  impl_->stopping = true;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

AssetStore& Service::store() { return *impl_->store; }

const std::vector<std::string>& Service::routes() const { return impl_->table; }

}  // namespace previz::service
