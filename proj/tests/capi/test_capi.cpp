// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

// Exercises libpreviz through its C header only, plus the CLI built on it.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "previz/previz.h"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json take(char* s) {
  REQUIRE(s != nullptr);
  json j = json::parse(s);
  previz_free(s);
  return j;
}

fs::path scratch(const char* name) {
  const auto dir = fs::temp_directory_path() / ("previz_capi_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct Run {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run cli(const fs::path& cwd, const std::string& args) {
  const std::string cmd = "cd '" + cwd.string() + "' && '" PREVIZ_CLI "' " + args + " >stdout.txt 2>stderr.txt";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(cwd / "stdout.txt"), slurp(cwd / "stderr.txt")};
}

// Owns a store, the demo project and a backend for one test.
struct Demo {
  previz_store* store = nullptr;
  previz_project* project = nullptr;
  previz_backend* backend = nullptr;

  explicit Demo(const char* backend_spec = "stub") {
    REQUIRE(previz_store_open(nullptr, &store) == PREVIZ_OK);
    REQUIRE(previz_project_demo(store, &project) == PREVIZ_OK);
    REQUIRE(previz_backend_open(store, backend_spec, 1, &backend) == PREVIZ_OK);
  }
  ~Demo() {
    previz_backend_close(backend);
    previz_project_free(project);
    previz_store_close(store);
  }
};

}  // namespace

TEST_CASE("status codes and names") {
  CHECK(previz_abi_version() == PREVIZ_ABI_VERSION);
  CHECK(std::string(previz_status_name(PREVIZ_OK)) == "Ok");
  CHECK(std::string(previz_status_name(PREVIZ_STALE_VERSION)) == "StaleVersion");
  CHECK(std::string(previz_status_name(PREVIZ_INTERNAL)) == "Internal");
  CHECK(std::string(previz_status_name(999)) == "Unknown");
  CHECK(std::string(previz_status_name(-1)) == "Unknown");
}

TEST_CASE("failures set last_error and successes clear it") {
  previz_project* p = nullptr;
  CHECK(previz_project_from_json("{not json", &p) != PREVIZ_OK);
  CHECK(p == nullptr);
  CHECK(std::string(previz_last_error()).size() > 0);

  CHECK(previz_project_load("/nonexistent/x.previz", nullptr, &p) == PREVIZ_IO_ERROR);
  CHECK(std::string(previz_last_error()).find("x.previz") != std::string::npos);

  char* out = nullptr;
  CHECK(previz_resemblance("Strict", 20, &out) == PREVIZ_OK);
  previz_free(out);
  CHECK(std::string(previz_last_error()).empty());

  CHECK(previz_resemblance("Sloppy", 20, &out) == PREVIZ_INVALID_REQUEST);
}

TEST_CASE("store put and get round trip") {
  previz_store* s = nullptr;
  REQUIRE(previz_store_open(nullptr, &s) == PREVIZ_OK);
  char* uri = nullptr;
  REQUIRE(previz_store_put(s, "hello", 5, "text/plain", &uri) == PREVIZ_OK);
  CHECK(std::string(uri) == "sha256:2cf24dba5fb0a30e26e83b2ac5b9e29e1b161e5c1fa7425e73043362938b9824");
  void* bytes = nullptr;
  std::size_t size = 0;
  REQUIRE(previz_store_get(s, uri, &bytes, &size) == PREVIZ_OK);
  CHECK(std::string(static_cast<char*>(bytes), size) == "hello");
  previz_free(bytes);
  previz_free(uri);
  CHECK(previz_store_get(s, "sha256:00", &bytes, &size) != PREVIZ_OK);
  previz_store_close(s);
}

TEST_CASE("demo project: json round trip, plan, render") {
  Demo d;
  CHECK(previz_project_validate(d.project, d.store) == PREVIZ_OK);

  char* text = nullptr;
  REQUIRE(previz_project_to_json(d.project, &text) == PREVIZ_OK);
  const std::string first = text;
  previz_project* copy = nullptr;
  REQUIRE(previz_project_from_json(text, &copy) == PREVIZ_OK);
  previz_free(text);
  REQUIRE(previz_project_to_json(copy, &text) == PREVIZ_OK);
  CHECK(first == text);
  previz_free(text);
  previz_project_free(copy);

  char* out = nullptr;
  REQUIRE(previz_plan(d.project, R"({"clip_id": "c1"})", &out) == PREVIZ_OK);
  const auto plan = take(out);
  CHECK(plan["frames"].size() == 32);

  REQUIRE(previz_render(d.project, d.store, "c1", R"({"width": 64, "height": 36})", &out) == PREVIZ_OK);
  const auto rendered = take(out);
  CHECK(rendered["frames"].size() == 32);
  CHECK(rendered["width"] == 64);

  CHECK(previz_render(d.project, d.store, "nope", nullptr, &out) == PREVIZ_UNKNOWN_ID);
  CHECK(previz_capture(d.project, d.store, "c1", R"({"frame": 32})", &out) == PREVIZ_INVALID_ARGUMENT);
  CHECK(previz_render(nullptr, d.store, "c1", nullptr, &out) == PREVIZ_INVALID_ARGUMENT);
}

TEST_CASE("save and load carry the assets along") {
  const auto dir = scratch("save");
  const auto path = (dir / "p.previz").string();
  std::string before;
  {
    Demo d;
    char* out = nullptr;
    char* fields = nullptr;
    REQUIRE(previz_demo_fields(&fields) == PREVIZ_OK);
    const json o = {{"level", "Strict"}, {"width", 64}, {"height", 36}, {"fields", json::parse(fields)}};
    previz_free(fields);
    REQUIRE(previz_restyle(d.project, d.store, d.backend, "c1", o.dump().c_str(), &out) == PREVIZ_OK);
    CHECK(take(out)["status"] == "done");
    REQUIRE(previz_project_save(d.project, d.store, path.c_str()) == PREVIZ_OK);
    char* text = nullptr;
    REQUIRE(previz_project_to_json(d.project, &text) == PREVIZ_OK);
    before = text;
    previz_free(text);
  }
  CHECK(fs::is_directory(dir / "p.assets"));

  previz_store* s = nullptr;
  REQUIRE(previz_store_open(nullptr, &s) == PREVIZ_OK);
  previz_project* p = nullptr;
  REQUIRE(previz_project_load(path.c_str(), s, &p) == PREVIZ_OK);
  CHECK(previz_project_validate(p, s) == PREVIZ_OK);
  char* text = nullptr;
  REQUIRE(previz_project_to_json(p, &text) == PREVIZ_OK);
  CHECK(before == text);
  previz_free(text);
  previz_project_free(p);
  previz_store_close(s);
}

TEST_CASE("restyle through a previz-gen/1 server matches the in-process stub") {
  previz_gen_server* server = nullptr;
  int port = 0;
  REQUIRE(previz_gen_server_start(1, 0, "127.0.0.1", 0, &server, &port) == PREVIZ_OK);
  REQUIRE(port > 0);

  char* fields = nullptr;
  REQUIRE(previz_demo_fields(&fields) == PREVIZ_OK);
  const json o = {{"level", "Faithful"}, {"frame", 8}, {"width", 96}, {"height", 54}, {"fields", json::parse(fields)}};
  previz_free(fields);

  std::string results[2];
  const std::string remote = "http://127.0.0.1:" + std::to_string(port);
  const char* specs[2] = {"stub", remote.c_str()};
  for (int i = 0; i < 2; ++i) {
    Demo d(specs[i]);
    char* out = nullptr;
    REQUIRE(previz_restyle(d.project, d.store, d.backend, "c1", o.dump().c_str(), &out) == PREVIZ_OK);
    const auto r = take(out);
    REQUIRE(r["status"] == "done");
    results[i] = r["result"];

    const std::string job = r["job_id"];
    REQUIRE(previz_job_poll(d.backend, job.c_str(), &out) == PREVIZ_OK);
    CHECK(take(out)["status"] == "done");
    int cancelled = -1;
    REQUIRE(previz_job_cancel(d.backend, job.c_str(), &cancelled) == PREVIZ_OK);
    CHECK(cancelled == 0);
    CHECK(previz_job_poll(d.backend, "job-none", &out) == PREVIZ_UNKNOWN_JOB);
  }
  CHECK(results[0] == results[1]);
  previz_gen_server_stop(server);

  previz_store* s = nullptr;
  REQUIRE(previz_store_open(nullptr, &s) == PREVIZ_OK);
  previz_backend* b = nullptr;
  CHECK(previz_backend_open(s, "ftp://nowhere", 1, &b) != PREVIZ_OK);
  previz_store_close(s);
}

TEST_CASE("generate without waiting, then wait and sync") {
  Demo d;
  char* fields = nullptr;
  REQUIRE(previz_demo_fields(&fields) == PREVIZ_OK);
  const json o = {{"mode", "Creative"}, {"width", 64}, {"height", 36}, {"wait", false},
                  {"fields", json::parse(fields)}};
  previz_free(fields);
  char* out = nullptr;
  REQUIRE(previz_generate(d.project, d.store, d.backend, "c1", o.dump().c_str(), &out) == PREVIZ_OK);
  const auto r = take(out);
  CHECK(r["frames"] == 32);
  CHECK(r["mode"] == "Creative");
  CHECK(r["conditioning_weight"].get<double>() == doctest::Approx(0.35));
  const std::string job = r["job_id"];

  REQUIRE(previz_job_wait(d.backend, job.c_str(), 60000, &out) == PREVIZ_OK);
  const auto rec = take(out);
  CHECK(rec["status"] == "done");
  int changed = -1;
  REQUIRE(previz_project_sync(d.project, d.backend, &changed) == PREVIZ_OK);
  CHECK(changed == 1);
  REQUIRE(previz_project_sync(d.project, d.backend, &changed) == PREVIZ_OK);
  CHECK(changed == 0);

  char* text = nullptr;
  REQUIRE(previz_project_to_json(d.project, &text) == PREVIZ_OK);
  const auto pj = json::parse(text);
  previz_free(text);
  bool generated = false;
  for (const auto& tl : pj["timelines"]) {
    for (const auto& c : tl["clips"]) generated |= c["id"] == "c1" && c["status"] == "generated";
  }
  CHECK(generated);
}

TEST_CASE("remix script keeps the project unchanged on failure") {
  Demo d;
  char* before = nullptr;
  REQUIRE(previz_project_to_json(d.project, &before) == PREVIZ_OK);

  const json bad = {{"skeleton_id", "x"},
                    {"steps", {{{"op", "import"}, {"path", PREVIZ_FIXTURE_DIR "/dialogue_labeled.skel"}},
                               {{"op", "crop"}, {"t0", 5.0}, {"t1", 1.0}}}}};
  char* out = nullptr;
  CHECK(previz_remix(d.project, d.store, bad.dump().c_str(), &out) == PREVIZ_EMPTY_RANGE);
  char* after = nullptr;
  REQUIRE(previz_project_to_json(d.project, &after) == PREVIZ_OK);
  CHECK(std::string(before) == after);
  previz_free(before);
  previz_free(after);

  const json good = {{"skeleton_id", "x"},
                     {"steps",
                      {{{"op", "import"}, {"path", "dialogue_labeled.skel"}},
                       {{"op", "crop"}, {"t0", 0.0}, {"t1", 2.0}},
                       {{"op", "transform"}, {"person", 0}, {"translate", {0.05, 0.0}}, {"scale", 1.0}},
                       {{"op", "recomposite"}, {"fps", 16}, {"duration", 2.0}}}},
                     {"base_dir", PREVIZ_FIXTURE_DIR}};
  REQUIRE(previz_remix(d.project, d.store, good.dump().c_str(), &out) == PREVIZ_OK);
  const auto r = take(out);
  CHECK(r["steps"].size() == 4);
  CHECK(r["steps"][3]["frames"] == 32);
  CHECK(r.contains("output"));
  CHECK(previz_project_validate(d.project, d.store) == PREVIZ_OK);
}

TEST_CASE("service starts behind the C interface") {
  previz_service* s = nullptr;
  int port = 0;
  REQUIRE(previz_service_start("{}", "127.0.0.1", 0, &s, &port) == PREVIZ_OK);
  httplib::Client c("127.0.0.1", port);
  const auto res = c.Get("/api/v1/health");
  REQUIRE(res);
  CHECK(res->status == 200);
  previz_service_stop(s);
}

TEST_CASE("cli: exit codes and error json") {
  const auto dir = scratch("cli");
  auto r = cli(dir, "demo -o d.previz");
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["project"] == "d.previz");

  r = cli(dir, "validate d.previz");
  CHECK(r.code == 0);

  r = cli(dir, "render d.previz --clip nope -o frames");
  CHECK(r.code == PREVIZ_UNKNOWN_ID);
  const auto err = json::parse(r.err);
  CHECK(err["error"] == "UnknownId");
  CHECK(err["message"].get<std::string>().find("nope") != std::string::npos);

  r = cli(dir, "validate missing.previz");
  CHECK(r.code == PREVIZ_IO_ERROR);
  CHECK(!fs::exists(dir / "missing.assets"));

  r = cli(dir, "render d.previz --width 64 --height 36 -o frames");
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["frames"] == 32);
  CHECK(fs::exists(dir / "frames" / "frames.json"));

  r = cli(dir, "restyle d.previz --fields demo --level Strict --width 64 --height 36 -o r.png");
  REQUIRE(r.code == 0);
  CHECK(fs::file_size(dir / "r.png") > 8);
  r = cli(dir, "generate d.previz --fields demo --width 64 --height 36");
  REQUIRE(r.code == 0);
  r = cli(dir, "validate d.previz");
  CHECK(r.code == 0);

  r = cli(dir, "params --level Loose");
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["levels"][0]["skip_steps"] == 0);

  r = cli(dir, "plan d.previz --clip c1");
  CHECK(r.code == 0);
  CHECK(r.out.find("c1") != std::string::npos);
}
