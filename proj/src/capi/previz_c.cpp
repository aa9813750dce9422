// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

#include "previz/previz.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <memory>
#include <new>
#include <string>

#include "gateway/gateway.hpp"
#include "gateway/wire.hpp"
#include "json.hpp"
#include "project/codec.hpp"
#include "project/demo.hpp"
#include "project/pipeline.hpp"
#include "service/args.hpp"
#include "service/service.hpp"

using namespace previz;
using nlohmann::json;
namespace args = previz::service::args;

struct previz_store {
  std::unique_ptr<AssetStore> store;
};

struct previz_project {
  project::Project project;
};

struct previz_backend {
  std::unique_ptr<gateway::Backend> backend;
};

struct previz_service {
  std::unique_ptr<service::Service> service;
};

struct previz_gen_server {
  std::unique_ptr<gateway::GenServer> server;
};

namespace {

thread_local std::string g_last_error;

template <typename Fn>
previz_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return PREVIZ_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return static_cast<previz_status>(e.code());
  } catch (const json::exception& e) {
    g_last_error = e.what();
    return PREVIZ_INVALID_REQUEST;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return PREVIZ_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PREVIZ_INTERNAL;
  }
}

void require(const void* p, const char* name) {
  if (!p) fail(Errc::kInvalidArgument, std::string(name) + " must not be null");
}

char* dup(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size());
  out[s.size()] = '\0';
  return out;
}

void emit(char** out, const json& j) {
  require(out, "result");
  *out = dup(j.dump());
}

json options(const char* text) { return args::parse_object(text ? std::string_view(text) : std::string_view()); }

json record_json(const gateway::JobRecord& rec) { return gateway::wire::encode(rec); }

service::ServiceConfig service_config(const json& o) {
  service::ServiceConfig c;
  if (o.contains("asset_dir")) c.asset_dir = o.at("asset_dir").get<std::string>();
  if (o.contains("backend")) c.backend = o.at("backend").get<std::string>();
  c.stub.workers = args::value_or(o, "workers", c.stub.workers);
  c.stub.latency = std::chrono::milliseconds(args::value_or(o, "latency_ms", 0));
  c.project_dir = args::value_or<std::string>(o, "project_dir", c.project_dir);
  return service::config_from_env(c);
}

}  // namespace

extern "C" {

int previz_abi_version(void) { return PREVIZ_ABI_VERSION; }

const char* previz_status_name(previz_status status) {
  if (status < 0 || status > static_cast<int>(Errc::kInternal)) return "Unknown";
  return errc_name(static_cast<Errc>(status)).data();
}

const char* previz_last_error(void) { return g_last_error.c_str(); }

void previz_free(void* p) { std::free(p); }

previz_status previz_store_open(const char* dir, previz_store** out) {
  return guarded([&] {
    require(out, "out");
    auto s = std::make_unique<previz_store>();
    s->store = dir ? std::make_unique<AssetStore>(std::filesystem::path(dir)) : std::make_unique<AssetStore>();
    *out = s.release();
  });
}

void previz_store_close(previz_store* store) { delete store; }

previz_status previz_store_put(previz_store* store, const void* bytes, size_t size, const char* kind, char** uri) {
  return guarded([&] {
    require(store, "store");
    require(uri, "uri");
    if (size) require(bytes, "bytes");
    const auto ref = store->store->put(std::span(static_cast<const std::uint8_t*>(bytes), size),
                                       kind ? std::string_view(kind) : media::kBinary);
    *uri = dup(ref.uri());
  });
}

previz_status previz_store_get(const previz_store* store, const char* uri, void** bytes, size_t* size) {
  return guarded([&] {
    require(store, "store");
    require(uri, "uri");
    require(bytes, "bytes");
    require(size, "size");
    const auto data = store->store->get(uri);
    void* buf = std::malloc(data.empty() ? 1 : data.size());
    if (!buf) throw std::bad_alloc();
    if (!data.empty()) std::memcpy(buf, data.data(), data.size());
    *bytes = buf;
    *size = data.size();
  });
}

previz_status previz_project_demo(previz_store* store, previz_project** out) {
  return guarded([&] {
    require(store, "store");
    require(out, "out");
    auto p = std::make_unique<previz_project>();
    p->project = project::build_demo(*store->store);
    *out = p.release();
  });
}

previz_status previz_project_load(const char* path, previz_store* store, previz_project** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto p = std::make_unique<previz_project>();
    p->project = project::load_project(path);
    if (store) {
      const auto dir = project::asset_dir_for(path);
      if (std::filesystem::is_directory(dir) &&
          !(store->store->directory() && std::filesystem::equivalent(*store->store->directory(), dir))) {
        AssetStore disk{std::filesystem::path(dir)};
        project::copy_assets(p->project, disk, *store->store);
      }
    }
    *out = p.release();
  });
}

previz_status previz_project_save(const previz_project* project, const previz_store* store, const char* path) {
  return guarded([&] {
    require(project, "project");
    require(path, "path");
    if (store) {
      const auto dir = project::asset_dir_for(path);
      const bool same = store->store->directory() && std::filesystem::exists(dir) &&
                        std::filesystem::equivalent(*store->store->directory(), dir);
      if (!same) {
        AssetStore disk{std::filesystem::path(dir)};
        project::copy_assets(project->project, *store->store, disk);
      }
    }
    project::save_project(project->project, path);
  });
}

previz_status previz_project_from_json(const char* text, previz_project** out) {
  return guarded([&] {
    require(text, "json");
    require(out, "out");
    auto p = std::make_unique<previz_project>();
    p->project = project::from_json(text);
    *out = p.release();
  });
}

previz_status previz_project_to_json(const previz_project* project, char** out) {
  return guarded([&] {
    require(project, "project");
    require(out, "out");
    *out = dup(project::to_json(project->project));
  });
}

previz_status previz_project_validate(const previz_project* project, const previz_store* store) {
  return guarded([&] {
    require(project, "project");
    project::validate_project(project->project, store ? store->store.get() : nullptr);
  });
}

void previz_project_free(previz_project* project) { delete project; }

previz_status previz_backend_open(previz_store* store, const char* spec, int workers, previz_backend** out) {
  return guarded([&] {
    require(store, "store");
    require(out, "out");
    gateway::StubConfig stub;
    if (workers > 0) stub.workers = workers;
    auto b = std::make_unique<previz_backend>();
    b->backend = gateway::make_backend(*store->store, spec ? std::optional<std::string>(spec) : std::nullopt, stub);
    *out = b.release();
  });
}

void previz_backend_close(previz_backend* backend) { delete backend; }

previz_status previz_job_poll(previz_backend* backend, const char* job_id, char** record) {
  return guarded([&] {
    require(backend, "backend");
    require(job_id, "job_id");
    emit(record, record_json(backend->backend->poll(job_id)));
  });
}

previz_status previz_job_wait(previz_backend* backend, const char* job_id, int timeout_ms, char** record) {
  return guarded([&] {
    require(backend, "backend");
    require(job_id, "job_id");
    const auto timeout = std::chrono::milliseconds(timeout_ms > 0 ? timeout_ms : 60000);
    emit(record, record_json(project::wait_for(*backend->backend, job_id, timeout)));
  });
}

previz_status previz_job_cancel(previz_backend* backend, const char* job_id, int* cancelled) {
  return guarded([&] {
    require(backend, "backend");
    require(job_id, "job_id");
    const bool c = backend->backend->cancel(job_id);
    if (cancelled) *cancelled = c ? 1 : 0;
  });
}

previz_status previz_project_sync(previz_project* project, previz_backend* backend, int* changed) {
  return guarded([&] {
    require(project, "project");
    require(backend, "backend");
    const bool c = project::sync_jobs(project->project, *backend->backend);
    if (changed) *changed = c ? 1 : 0;
  });
}

previz_status previz_plan(const previz_project* project, const char* options_json, char** result) {
  return guarded([&] {
    require(project, "project");
    const auto& p = project->project;
    const json o = options(options_json);
    if (o.contains("clip_id")) {
      std::optional<double> fps;
      if (o.contains("fps")) fps = o.at("fps").get<double>();
      emit(result, args::plan_json(project::plan_clip(p, o.at("clip_id").get<std::string>(), fps)));
      return;
    }
    if (p.timelines.empty()) fail(Errc::kUnknownId, "project has no timeline");
    const auto* tl = o.contains("timeline_id") ? p.find_timeline(o.at("timeline_id").get<std::string>())
                                               : &p.timelines.front();
    if (!tl) fail(Errc::kUnknownId, "unknown timeline");
    const auto* s = p.find_scene(tl->scene_id);
    if (!s) fail(Errc::kUnknownId, "unknown scene '" + tl->scene_id + "'");
    double end = 0;
    for (const auto& c : tl->clips) end = std::max(end, c.t_out);
    emit(result, args::plan_json(timeline::compose_sequence(*tl, *s, args::value_or(o, "t0", 0.0),
                                                            args::value_or(o, "t1", end),
                                                            args::value_or(o, "fps", timeline::kDefaultFps))));
  });
}

previz_status previz_capture(const previz_project* project, previz_store* store, const char* clip_id,
                             const char* options_json, char** result) {
  return guarded([&] {
    require(project, "project");
    require(store, "store");
    require(clip_id, "clip_id");
    const json o = options(options_json);
    const int index = args::value_or(o, "frame", 0);
    const auto frame = project::capture(project->project, clip_id, index, args::size_of(o));
    const auto plan = project::plan_clip(project->project, clip_id);
    json out = args::frame_refs_json(
        project::store_frame(frame, index, plan.frames.at(static_cast<std::size_t>(index)).t, *store->store));
    out["legend"] = args::legend_json(frame.legend);
    emit(result, out);
  });
}

previz_status previz_render(const previz_project* project, previz_store* store, const char* clip_id,
                            const char* options_json, char** result) {
  return guarded([&] {
    require(project, "project");
    require(store, "store");
    require(clip_id, "clip_id");
    const json o = options(options_json);
    project::RenderOptions opt;
    opt.size = args::size_of(o);
    if (o.contains("fps") && !o.at("fps").is_null()) opt.fps = o.at("fps").get<double>();
    const auto rc = project::render_clip(project->project, clip_id, *store->store, opt);
    json out = args::rendered_json(rc);
    if (o.contains("export_dir")) {
      const auto dir = o.at("export_dir").get<std::string>();
      project::export_rendered(rc, *store->store, dir);
      out["exported"] = dir;
    }
    emit(result, out);
  });
}

previz_status previz_restyle(previz_project* project, previz_store* store, previz_backend* backend,
                             const char* clip_id, const char* options_json, char** result) {
  return guarded([&] {
    require(project, "project");
    require(store, "store");
    require(backend, "backend");
    require(clip_id, "clip_id");
    const json o = options(options_json);
    const auto opt = args::restyle_options(o);
    auto& p = project->project;
    const auto prep = project::prepare_restyle(p, clip_id, opt, *store->store);
    const std::string job_id = project::submit(p, *backend->backend, clip_id, prep).job.job_id;
    json out = {{"job_id", job_id},
                {"request", prep.request_ref.uri()},
                {"source", args::frame_refs_json(prep.source)},
                {"level", style::level_name(opt.level)},
                {"guidance", gateway::wire::encode(prep.request.guidance)}};
    if (args::value_or(o, "wait", true)) {
      const auto rec = project::wait_for(*backend->backend, job_id,
                                         std::chrono::milliseconds(args::value_or(o, "timeout_ms", 120000)));
      project::sync_jobs(p, *backend->backend);
      out["status"] = gateway::job_status_name(rec.status);
      if (rec.status == gateway::JobStatus::kDone) {
        out["result"] = rec.results.front().uri();
        out["distance"] =
            project::mean_abs_difference_png(*store->store, prep.source.color.hash, rec.results.front().hash);
      } else {
        out["reason"] = rec.reason;
      }
    } else {
      out["status"] = gateway::job_status_name(backend->backend->poll(job_id).status);
    }
    emit(result, out);
  });
}

previz_status previz_generate(previz_project* project, previz_store* store, previz_backend* backend,
                              const char* clip_id, const char* options_json, char** result) {
  return guarded([&] {
    require(project, "project");
    require(store, "store");
    require(backend, "backend");
    require(clip_id, "clip_id");
    const json o = options(options_json);
    auto& p = project->project;
    const auto prep = project::prepare_generate(p, clip_id, args::generate_options(o), *store->store);
    const std::string job_id = project::submit(p, *backend->backend, clip_id, prep).job.job_id;
    json out = {{"job_id", job_id},
                {"request", prep.request_ref.uri()},
                {"frames", prep.request.frame_count()},
                {"mode", style::video_mode_name(prep.request.mode)},
                {"conditioning_weight", prep.request.conditioning_weight},
                {"conditioning", prep.conditioning.manifest.uri()}};
    if (args::value_or(o, "wait", true)) {
      const auto rec = project::wait_for(*backend->backend, job_id,
                                         std::chrono::milliseconds(args::value_or(o, "timeout_ms", 120000)));
      project::sync_jobs(p, *backend->backend);
      out["status"] = gateway::job_status_name(rec.status);
      if (rec.status == gateway::JobStatus::kDone) {
        json frames = json::array();
        for (std::size_t i = 0; i + 1 < rec.results.size(); ++i) frames.push_back(rec.results[i].uri());
        out["results"] = frames;
        out["container"] = rec.results.back().uri();
      } else {
        out["reason"] = rec.reason;
      }
    } else {
      out["status"] = gateway::job_status_name(backend->backend->poll(job_id).status);
    }
    emit(result, out);
  });
}

previz_status previz_remix(previz_project* project, previz_store* store, const char* script_json, char** result) {
  return guarded([&] {
    require(project, "project");
    require(store, "store");
    const json script = options(script_json);
    project::Project copy = project->project;
    const json out = args::run_remix_script(copy, *store->store, script,
                                            args::value_or<std::string>(script, "base_dir", "."));
    project::validate_project(copy, store->store.get());
    project->project = std::move(copy);
    emit(result, out);
  });
}

previz_status previz_resemblance(const char* level, int total_steps, char** result) {
  return guarded([&] {
    const int steps = total_steps > 0 ? total_steps : style::kReferenceSteps;
    json levels = json::array();
    for (const auto l : style::kAllLevels) {
      if (level && *level && style::level_name(l) != level) continue;
      json g = gateway::wire::encode(style::resemblance_params(l, steps));
      g["level"] = style::level_name(l);
      levels.push_back(g);
    }
    if (levels.empty()) fail(Errc::kInvalidRequest, std::string("unknown resemblance level '") + level + "'");
    emit(result, {{"levels", levels}});
  });
}

previz_status previz_compose_prompt(const char* fields_json, char** result) {
  return guarded([&] {
    const json o = options(fields_json);
    const auto bundle = style::compose_prompt(args::fields_from_json(o.value("fields", o)));
    emit(result, {{"bundle", gateway::wire::encode(bundle)}});
  });
}

previz_status previz_demo_fields(char** fields_json) {
  return guarded([&] { emit(fields_json, args::fields_json(project::demo_prompt_fields())); });
}

previz_status previz_service_start(const char* options_json, const char* host, int port, previz_service** out,
                                   int* bound_port) {
  return guarded([&] {
    require(out, "out");
    auto s = std::make_unique<previz_service>();
    s->service = std::make_unique<service::Service>(service_config(options(options_json)));
    const int bound = s->service->start(host ? host : "127.0.0.1", port);
    if (bound_port) *bound_port = bound;
    *out = s.release();
  });
}

void previz_service_stop(previz_service* service) { delete service; }

previz_status previz_service_run(const char* options_json, const char* host, int port) {
  return guarded([&] {
    service::Service s(service_config(options(options_json)));
    s.listen(host ? host : "127.0.0.1", port > 0 ? port : service::kDefaultPort);
  });
}

previz_status previz_gen_server_start(int workers, int latency_ms, const char* host, int port,
                                      previz_gen_server** out, int* bound_port) {
  return guarded([&] {
    require(out, "out");
    auto s = std::make_unique<previz_gen_server>();
    s->server = std::make_unique<gateway::GenServer>(
        gateway::StubConfig{workers > 0 ? workers : 1, std::chrono::milliseconds(latency_ms)});
    const int bound = s->server->start(host ? host : "127.0.0.1", port);
    if (bound_port) *bound_port = bound;
    *out = s.release();
  });
}

void previz_gen_server_stop(previz_gen_server* server) { delete server; }

previz_status previz_gen_server_run(int workers, int latency_ms, const char* host, int port) {
  return guarded([&] {
    gateway::GenServer s(gateway::StubConfig{workers > 0 ? workers : 1, std::chrono::milliseconds(latency_ms)});
    s.listen(host ? host : "127.0.0.1", port);
  });
}

}  // extern "C"
