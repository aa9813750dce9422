// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Everything goes through the C interface.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "previz/previz.h"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Carries a status out of a subcommand.
struct Failure {
  previz_status status;
  std::string message;
};

void check(previz_status s) {
  if (s != PREVIZ_OK) throw Failure{s, previz_last_error()};
}

std::string take(char* s) {
  std::string out = s ? s : "";
  previz_free(s);
  return out;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{PREVIZ_IO_ERROR, "cannot read " + path};
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_bytes(const std::string& path, const void* data, std::size_t size) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
  if (!out) throw Failure{PREVIZ_IO_ERROR, "cannot write " + path};
}

std::string asset_dir(const std::string& project_path) {
  const fs::path p(project_path);
  return (p.parent_path() / (p.stem().string() + ".assets")).string();
}

// Project file plus its sibling asset directory, opened together.
class Session {
 public:
  explicit Session(std::string path, bool create = false) : path_(std::move(path)) {
    if (!create && !fs::is_regular_file(path_)) throw Failure{PREVIZ_IO_ERROR, "cannot open " + path_};
    check(previz_store_open(asset_dir(path_).c_str(), &store_));
    if (!create) check(previz_project_load(path_.c_str(), store_, &project_));
  }
  ~Session() {
    if (backend_) previz_backend_close(backend_);
    if (project_) previz_project_free(project_);
    previz_store_close(store_);
  }
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  void demo() { check(previz_project_demo(store_, &project_)); }
  void save() { check(previz_project_save(project_, store_, path_.c_str())); }
  previz_backend* backend(const std::string& spec, int workers) {
    if (!backend_) check(previz_backend_open(store_, spec.empty() ? nullptr : spec.c_str(), workers, &backend_));
    return backend_;
  }
  void export_asset(const std::string& uri, const std::string& path) {
    void* bytes = nullptr;
    std::size_t size = 0;
    check(previz_store_get(store_, uri.c_str(), &bytes, &size));
    try {
      write_bytes(path, bytes, size);
    } catch (...) {
      previz_free(bytes);
      throw;
    }
    previz_free(bytes);
  }

  previz_store* store() { return store_; }
  previz_project* project() { return project_; }

 private:
  std::string path_;
  previz_store* store_ = nullptr;
  previz_project* project_ = nullptr;
  previz_backend* backend_ = nullptr;
};

// "demo" selects the built-in demo fields; anything else is a JSON file.
json load_fields(const std::string& spec) {
  if (spec.empty()) return json();
  if (spec == "demo") {
    char* out = nullptr;
    check(previz_demo_fields(&out));
    return json::parse(take(out));
  }
  return json::parse(read_text(spec));
}

void print(const json& j, bool pretty = true) { std::cout << j.dump(pretty ? 2 : -1) << "\n"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"previz: previsualization engine"};
  app.require_subcommand(1);

  std::string project_path;
  std::string clip = "c1";
  std::string out;
  std::string fields_spec;
  std::string backend_spec;
  int workers = 1;
  int width = 512;
  int height = 288;
  double fps = 0;
  bool no_save = false;
  bool as_json = false;

  std::string demo_out = "demo.previz";
  auto* demo = app.add_subcommand("demo", "Write the hacker-scene demo project");
  demo->add_option("--out,-o", demo_out, "Project file")->capture_default_str();

  auto* validate = app.add_subcommand("validate", "Check a project file and its assets");
  validate->add_option("project", project_path)->required();

  std::string timeline_id;
  double t0 = 0, t1 = -1;
  auto* plan = app.add_subcommand("plan", "Print the frame plan of a timeline or clip");
  plan->add_option("project", project_path)->required();
  plan->add_option("--clip", clip, "Plan one clip instead of the whole timeline");
  plan->add_option("--timeline", timeline_id);
  plan->add_option("--fps", fps);
  plan->add_option("--t0", t0);
  plan->add_option("--t1", t1);
  plan->add_flag("--json", as_json);

  auto* render = app.add_subcommand("render", "Render conditioning frames of a clip to PNGs");
  render->add_option("project", project_path)->required();
  render->add_option("--clip", clip);
  render->add_option("--fps", fps, "Defaults to the clip rate");
  render->add_option("--width", width);
  render->add_option("--height", height);
  render->add_option("--out,-o", out, "Output directory")->required();

  std::string level = "Faithful";
  int frame = 0;
  int steps = 20;
  auto* restyle = app.add_subcommand("restyle", "Restyle one frame of a clip");
  restyle->add_option("project", project_path)->required();
  restyle->add_option("--clip", clip);
  restyle->add_option("--level", level)->check(CLI::IsMember({"Strict", "Faithful", "Flexible", "Loose"}));
  restyle->add_option("--frame", frame);
  restyle->add_option("--steps", steps);
  restyle->add_option("--fields", fields_spec, "JSON file, or 'demo'")->required();
  restyle->add_option("--width", width);
  restyle->add_option("--height", height);
  restyle->add_option("--out,-o", out, "Write the restyled PNG here");
  restyle->add_option("--backend", backend_spec, "'stub' or a previz-gen/1 URL");
  restyle->add_flag("--no-save", no_save, "Leave the project file untouched");

  std::string mode = "Resemble";
  std::string skeleton_id;
  auto* generate = app.add_subcommand("generate", "Generate a video for a clip");
  generate->add_option("project", project_path)->required();
  generate->add_option("--clip", clip);
  generate->add_option("--mode", mode)->check(CLI::IsMember({"Resemble", "Creative"}));
  generate->add_option("--fields", fields_spec, "JSON file, or 'demo'")->required();
  generate->add_option("--skeleton", skeleton_id, "Use a remixed skeleton as pose guidance");
  generate->add_option("--width", width);
  generate->add_option("--height", height);
  generate->add_option("--out,-o", out, "Write frame PNGs and the container here");
  generate->add_option("--backend", backend_spec);
  generate->add_flag("--no-save", no_save);

  std::string script_path;
  auto* remix = app.add_subcommand("remix", "Run a skeleton remix script");
  remix->add_option("project", project_path)->required();
  remix->add_option("--script", script_path)->required();
  remix->add_option("--out,-o", out, "Write the recomposited previz-skel/1 document here");

  std::string level_filter;
  auto* params = app.add_subcommand("params", "Print the resemblance table");
  params->add_option("--level", level_filter);
  params->add_option("--steps", steps);

  auto* prompt = app.add_subcommand("prompt", "Compose prompts from prompt fields");
  prompt->add_option("--fields", fields_spec)->required();

  std::string host = "127.0.0.1";
  int port = 8740;
  std::string asset_dir_opt;
  int latency_ms = 0;
  auto* serve = app.add_subcommand("serve", "Run the /api/v1 service");
  serve->add_option("--host", host);
  serve->add_option("--port", port);
  serve->add_option("--asset-dir", asset_dir_opt);
  serve->add_option("--backend", backend_spec);
  serve->add_option("--workers", workers);
  serve->add_option("--latency-ms", latency_ms);

  auto* gen_serve = app.add_subcommand("gen-serve", "Run a previz-gen/1 stub backend");
  gen_serve->add_option("--host", host);
  gen_serve->add_option("--port", port)->default_val(8741);
  gen_serve->add_option("--workers", workers);
  gen_serve->add_option("--latency-ms", latency_ms);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*demo) {
      Session s(demo_out, true);
      s.demo();
      s.save();
      print({{"project", demo_out}, {"assets", asset_dir(demo_out)}});
    } else if (*validate) {
      Session s(project_path);
      check(previz_project_validate(s.project(), s.store()));
      print({{"project", project_path}, {"valid", true}});
    } else if (*plan) {
      Session s(project_path);
      json o = json::object();
      if (plan->count("--clip")) o["clip_id"] = clip;
      if (!timeline_id.empty()) o["timeline_id"] = timeline_id;
      if (fps > 0) o["fps"] = fps;
      if (plan->count("--t0")) o["t0"] = t0;
      if (t1 >= 0) o["t1"] = t1;
      char* res = nullptr;
      check(previz_plan(s.project(), o.dump().c_str(), &res));
      const json r = json::parse(take(res));
      if (as_json) {
        print(r);
      } else {
        std::cout << r["table"].get<std::string>();
      }
    } else if (*render) {
      Session s(project_path);
      json o = {{"width", width}, {"height", height}, {"export_dir", out}};
      if (fps > 0) o["fps"] = fps;
      char* res = nullptr;
      check(previz_render(s.project(), s.store(), clip.c_str(), o.dump().c_str(), &res));
      const json r = json::parse(take(res));
      print({{"clip_id", r["clip_id"]},
             {"frames", r["frames"].size()},
             {"fps", r["fps"]},
             {"manifest", r["manifest"]},
             {"out", out}});
    } else if (*restyle) {
      Session s(project_path);
      const json o = {{"level", level},     {"frame", frame},   {"total_steps", steps},
                      {"width", width},     {"height", height}, {"fields", load_fields(fields_spec)}};
      char* res = nullptr;
      check(previz_restyle(s.project(), s.store(), s.backend(backend_spec, workers), clip.c_str(),
                           o.dump().c_str(), &res));
      const json r = json::parse(take(res));
      if (!out.empty() && r.contains("result")) s.export_asset(r["result"], out);
      if (!no_save) s.save();
      print(r);
      if (r["status"] != "done") return PREVIZ_JOB_FAILED;
    } else if (*generate) {
      Session s(project_path);
      json o = {{"mode", mode}, {"width", width}, {"height", height}, {"fields", load_fields(fields_spec)}};
      if (!skeleton_id.empty()) o["skeleton_id"] = skeleton_id;
      char* res = nullptr;
      check(previz_generate(s.project(), s.store(), s.backend(backend_spec, workers), clip.c_str(),
                            o.dump().c_str(), &res));
      const json r = json::parse(take(res));
      if (!out.empty() && r.contains("results")) {
        int i = 0;
        for (const auto& uri : r["results"]) {
          char name[32];
          std::snprintf(name, sizeof name, "frame_%04d.png", i++);
          s.export_asset(uri, (fs::path(out) / name).string());
        }
        s.export_asset(r["container"], (fs::path(out) / "video.json").string());
      }
      if (!no_save) s.save();
      json summary = r;
      if (summary.contains("results")) summary["results"] = summary["results"].size();
      print(summary);
      if (r["status"] != "done") return PREVIZ_JOB_FAILED;
    } else if (*remix) {
      Session s(project_path);
      json script = json::parse(read_text(script_path));
      if (!script.contains("base_dir")) script["base_dir"] = fs::absolute(script_path).parent_path().string();
      char* res = nullptr;
      check(previz_remix(s.project(), s.store(), script.dump().c_str(), &res));
      const json r = json::parse(take(res));
      if (!out.empty() && r.contains("output")) s.export_asset(r["output"], out);
      s.save();
      print(r);
    } else if (*params) {
      char* res = nullptr;
      check(previz_resemblance(level_filter.empty() ? nullptr : level_filter.c_str(), steps, &res));
      print(json::parse(take(res)));
    } else if (*prompt) {
      char* res = nullptr;
      check(previz_compose_prompt(load_fields(fields_spec).dump().c_str(), &res));
      print(json::parse(take(res)));
    } else if (*serve) {
      json o = {{"workers", workers}, {"latency_ms", latency_ms}};
      if (!asset_dir_opt.empty()) o["asset_dir"] = asset_dir_opt;
      if (!backend_spec.empty()) o["backend"] = backend_spec;
      std::cerr << "previz: serving /api/v1 on " << host << ":" << port << "\n";
      check(previz_service_run(o.dump().c_str(), host.c_str(), port));
    } else if (*gen_serve) {
      std::cerr << "previz: serving previz-gen/1 on " << host << ":" << port << "\n";
      check(previz_gen_server_run(workers, latency_ms, host.c_str(), port));
    }
  } catch (const Failure& f) {
    std::cerr << json{{"error", previz_status_name(f.status)}, {"message", f.message}}.dump() << "\n";
    return f.status;
  } catch (const json::exception& e) {
    std::cerr << json{{"error", previz_status_name(PREVIZ_INVALID_REQUEST)}, {"message", e.what()}}.dump() << "\n";
    return PREVIZ_INVALID_REQUEST;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", previz_status_name(PREVIZ_INTERNAL)}, {"message", e.what()}}.dump() << "\n";
    return PREVIZ_INTERNAL;
  }
  return 0;
}
