// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance run: one PASS/FAIL line per criterion, exit status = failures.
//
//   acceptance [--only N]... [--verbose]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "common/hash.hpp"
#include "common/text.hpp"
#include "project/demo.hpp"
#include "project/pipeline.hpp"
#include "project/project.hpp"
#include "raster/raster.hpp"
#include "service/args.hpp"
#include "service/service.hpp"
#include "skeleton/skeleton.hpp"
#include "support/api.hpp"
#include "support/gen.hpp"
#include "support/random_project.hpp"
#include "support/raycast_oracle.hpp"
#include "timeline/timeline.hpp"

using namespace previz;
using nlohmann::json;
using previz::testing::Gen;
namespace fs = std::filesystem;

namespace {

bool g_verbose = false;

// Collects failed expectations of one criterion.
class Outcome {
 public:
  void expect(bool ok, const std::string& what) {
    ++checks_;
    if (ok) return;
    ++failed_;
    if (notes_.size() < 8) notes_.push_back(what);
  }
  void note(std::string s) { detail_ = std::move(s); }
  bool ok() const { return failed_ == 0; }
  int checks() const { return checks_; }
  int failed() const { return failed_; }
  const std::vector<std::string>& notes() const { return notes_; }
  const std::string& detail() const { return detail_; }

 private:
  int checks_ = 0;
  int failed_ = 0;
  std::vector<std::string> notes_;
  std::string detail_;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("previz-acceptance-" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1. Resemblance table -------------------------------------------------------

void resemblance_table(Outcome& out) {
  struct Row {
    style::ResemblanceLevel level;
    const char* name;
    int skip;
    double strength;
    bool blend;
  };
  const Row rows[] = {{style::ResemblanceLevel::kStrict, "Strict", 5, 0.7, true},
                      {style::ResemblanceLevel::kFaithful, "Faithful", 1, 0.7, true},
                      {style::ResemblanceLevel::kFlexible, "Flexible", 0, 0.7, true},
                      {style::ResemblanceLevel::kLoose, "Loose", 0, 0.3, false}};
  for (const auto& r : rows) {
    const auto g = style::resemblance_params(r.level, 20);
    const std::string n = r.name;
    out.expect(style::level_name(r.level) == n, n + ": name");
    out.expect(g.total_steps == 20, n + ": total_steps");
    out.expect(g.skip_steps == r.skip, n + ": skip_steps " + std::to_string(g.skip_steps));
    out.expect(g.control_strength == r.strength, n + ": control_strength " + fmt("%.17g", g.control_strength));
    out.expect(g.use_latent_blend == r.blend, n + ": latent blend");
  }
  out.note("Strict 5/0.7, Faithful 1/0.7, Flexible 0/0.7, Loose 0/0.3 at 20 steps");
}

// 2. Adherence monotonicity ---------------------------------------------------

void adherence(Outcome& out) {
  const std::clock_t c0 = std::clock();
  AssetStore store;
  const auto p = project::build_demo(store);
  gateway::StubBackend backend(store);
  std::vector<double> d;
  for (const auto level : style::kAllLevels) {
    project::RestyleOptions opt;
    opt.fields = project::demo_prompt_fields();
    opt.level = level;
    opt.frame_index = 16;
    const auto prep = project::prepare_restyle(p, project::demo::kClipOts, opt, store);
    const auto rec = project::wait_for(backend, backend.submit_image(prep.request));
    out.expect(rec.status == gateway::JobStatus::kDone, std::string(style::level_name(level)) + " job not done");
    if (rec.status != gateway::JobStatus::kDone) return;
    d.push_back(project::mean_abs_difference_png(store, prep.source.color.hash, rec.results.front().hash));
  }
  const double cpu = static_cast<double>(std::clock() - c0) / CLOCKS_PER_SEC;
  for (std::size_t i = 1; i < d.size(); ++i) {
    out.expect(d[i - 1] < d[i], "distance not increasing at level " + std::to_string(i));
  }
  out.expect(cpu < 10.0, "cpu time " + fmt("%.2f s", cpu));
  out.note("distances " + fmt("%.2f", d[0]) + " < " + fmt("%.2f", d[1]) + " < " + fmt("%.2f", d[2]) + " < " +
           fmt("%.2f", d[3]) + ", cpu " + fmt("%.2f s", cpu));
}

// 3. Rasterizer vs ray-cast oracle ---------------------------------------------

scene::SceneEntity box(std::string id, Vec3 pos, Vec3 size) {
  scene::SceneEntity e;
  e.id = std::move(id);
  e.geometry = scene::BoxGeometry{size};
  e.transform.translation = pos;
  return e;
}

void rasterizer(Outcome& out) {
  const auto t0 = std::chrono::steady_clock::now();
  Gen g(64064);
  constexpr int kWanted = 24;
  int scenes = 0, attempts = 0, pixels = 0, max_depth_err = 0, max_color_err = 0;
  while (scenes < kWanted && attempts < 400) {
    ++attempts;
    scene::Scene s;
    s.id = "s";
    s.cameras.push_back(scene::make_camera("cam", scene::CameraPreset::kNormal, {}));
    s.lights.push_back({"amb", scene::LightKind::kAmbient, {1, 1, 1}, 0.35, {}, {}});
    scene::Light sun{"sun", scene::LightKind::kDirectional, {1, 0.95, 0.9}, 0.7, {}, {}};
    sun.transform.rotation = Quat::from_axis_angle({1, 0, 0}, g.uniform(-1.2, -0.2)) * Quat::from_yaw(g.uniform(-1, 1));
    s.lights.push_back(sun);
    scene::Camera cam = s.cameras[0];
    cam.fov_deg = g.uniform(30, 80);
    cam.transform.translation = {g.uniform(-0.5, 0.5), g.uniform(-0.5, 0.5), g.uniform(-0.5, 0.5)};
    cam.transform.rotation = Quat::from_yaw(g.uniform(-0.25, 0.25));
    for (int i = g.integer(1, 6); i > 0; --i) {
      auto e = box("b" + std::to_string(i), {g.uniform(-1.5, 1.5), g.uniform(-1, 1), g.uniform(-9, -3)},
                   {g.uniform(0.3, 2), g.uniform(0.3, 2), g.uniform(0.3, 2)});
      e.transform.rotation = Quat::from_axis_angle(
          normalized(Vec3{g.uniform(-1, 1), g.uniform(-1, 1), g.uniform(-1, 1)} + Vec3{0, 1e-3, 0}), g.uniform(-3, 3));
      e.base_color = {g.uniform(0, 1), g.uniform(0, 1), g.uniform(0, 1)};
      s = scene::add_entity(s, e).first;
    }
    const auto o = previz::testing::raycast(s, cam, 64, 64);
    if (o.ambiguous != 0) continue;  // a ray exactly on an edge or a depth tie has no unique answer
    ++scenes;
    const auto f = raster::render_frame(s, raster::static_state(s, cam), {64, 64});
    int id_mismatch = 0;
    for (std::size_t i = 0; i < f.id.data.size(); ++i) {
      if (f.id.data[i] != o.id[i]) {
        ++id_mismatch;
        continue;
      }
      const int want = o.id[i] ? raster::encode_depth(o.z[i], cam.near, cam.far) : 0;
      max_depth_err = std::max(max_depth_err, std::abs(int(f.depth.data[i]) - want));
      for (int c = 0; c < 3; ++c) {
        max_color_err = std::max(max_color_err, std::abs(int(f.color.data[i * 3 + c]) - int(o.color[i * 3 + c])));
      }
      pixels += o.id[i] != 0;
    }
    out.expect(id_mismatch == 0, "scene " + std::to_string(scenes) + ": " + std::to_string(id_mismatch) + " id pixels differ");
  }
  const double secs = seconds_since(t0);
  out.expect(scenes >= 20, "only " + std::to_string(scenes) + " unambiguous scenes");
  out.expect(max_depth_err <= 1, "depth error " + std::to_string(max_depth_err));
  out.expect(max_color_err <= 1, "color error " + std::to_string(max_color_err));
  out.expect(secs < 60, "runtime " + fmt("%.1f s", secs));
  out.note(std::to_string(scenes) + " scenes of 64x64 (" + std::to_string(attempts - scenes) +
           " skipped as ambiguous), " + std::to_string(pixels) + " covered pixels, max depth err " +
           std::to_string(max_depth_err) + ", max color err " + std::to_string(max_color_err) + ", " +
           fmt("%.1f s", secs));
}

// 4. Masks ---------------------------------------------------------------------

struct MaskFixture {
  std::string name;
  raster::ConditioningFrame frame;
  std::vector<std::uint16_t> characters;
};

MaskFixture fixture_from_ids(std::string name, const Gray16Image& ids, std::vector<std::uint16_t> chars) {
  MaskFixture fx;
  fx.name = std::move(name);
  auto& f = fx.frame;
  f.width = ids.width;
  f.height = ids.height;
  f.color = RgbImage(ids.width, ids.height);
  f.depth = GrayImage(ids.width, ids.height, 0);
  f.id = ids;
  std::set<std::uint16_t> present(ids.data.begin(), ids.data.end());
  for (const auto id : present) {
    if (id == 0) continue;
    const bool is_char = std::find(chars.begin(), chars.end(), id) != chars.end();
    f.legend.push_back({id, "e" + std::to_string(id), is_char ? "c" + std::to_string(id) : "", is_char});
  }
  fx.characters = std::move(chars);
  return fx;
}

std::vector<MaskFixture> mask_fixtures() {
  std::vector<MaskFixture> out;
  auto rect = [](Gray16Image& img, int x0, int y0, int x1, int y1, std::uint16_t v) {
    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < x1; ++x) *img.at(x, y) = v;
    }
  };
  {
    Gray16Image ids(40, 30, 0);
    rect(ids, 3, 5, 17, 20, 4);
    rect(ids, 20, 10, 35, 28, 9);
    out.push_back(fixture_from_ids("two rectangles", ids, {4, 9}));
  }
  {
    Gray16Image ids(48, 32, 0);
    rect(ids, 4, 4, 24, 28, 2);
    rect(ids, 24, 4, 44, 28, 3);
    rect(ids, 0, 28, 48, 32, 7);  // floor, not a character
    out.push_back(fixture_from_ids("touching characters", ids, {2, 3}));
  }
  {
    Gray16Image ids(64, 64, 0);
    for (int y = 0; y < 64; ++y) {
      for (int x = 0; x < 64; ++x) {
        if (std::hypot(x - 31.5, y - 31.5) <= 10) *ids.at(x, y) = 5;
      }
    }
    out.push_back(fixture_from_ids("disc", ids, {5}));
  }
  Gen g(4444);
  for (int k = 0; k < 8; ++k) {
    Gray16Image ids(g.integer(16, 64), g.integer(16, 64), 0);
    const int n = g.integer(1, 5);
    std::vector<std::uint16_t> chars;
    for (int i = 1; i <= n; ++i) {
      const int x0 = g.integer(0, ids.width - 2), y0 = g.integer(0, ids.height - 2);
      rect(ids, x0, y0, g.integer(x0 + 1, ids.width), g.integer(y0 + 1, ids.height), static_cast<std::uint16_t>(i));
      if (g.coin() || chars.empty()) chars.push_back(static_cast<std::uint16_t>(i));
    }
    // Overdraw may hide a character entirely; keep only visible ones.
    std::erase_if(chars, [&](std::uint16_t c) { return std::find(ids.data.begin(), ids.data.end(), c) == ids.data.end(); });
    if (!chars.empty()) out.push_back(fixture_from_ids("random " + std::to_string(k), ids, chars));
  }
  // Every frame of both demo clips, rendered from the scene.
  AssetStore store;
  const auto p = project::build_demo(store);
  for (const auto clip : {project::demo::kClipOts, project::demo::kClipTwo}) {
    const int frames = static_cast<int>(project::plan_clip(p, clip).frames.size());
    for (int i = 0; i < frames; ++i) {
      MaskFixture fx;
      fx.name = std::string(clip) + " frame " + std::to_string(i);
      fx.frame = project::capture(p, clip, i, {128, 72});
      for (const auto& e : fx.frame.legend) {
        if (e.is_character && std::find(fx.frame.id.data.begin(), fx.frame.id.data.end(), e.raster_id) !=
                                  fx.frame.id.data.end()) {
          fx.characters.push_back(e.raster_id);
        }
      }
      out.push_back(std::move(fx));
    }
  }
  return out;
}

void check_inversion(Outcome& out, const MaskFixture& fx, const raster::MaskSet& m, const std::string& tag) {
  bool ok = true;
  for (std::size_t i = 0; i < m.background.data.size() && ok; ++i) {
    int max_alpha = 0;
    for (const auto& c : m.characters) max_alpha = std::max<int>(max_alpha, c.alpha.data[i]);
    ok = m.background.data[i] == 255 - max_alpha;
  }
  out.expect(ok, fx.name + " " + tag + ": background is not the inverted composite");
}

void masks(Outcome& out) {
  const auto fixtures = mask_fixtures();
  int demo_chars = 0, sweeps = 0;
  const std::pair<double, double> sweep[] = {{15, 4.5}, {12, 3.5}, {18, 6}, {5, 0}, {0, 2}, {64, 16}};
  for (const auto& fx : fixtures) {
    const auto m = raster::masks_from_ids(fx.frame, fx.characters, 0, 0);
    out.expect(m.characters.size() == fx.characters.size(), fx.name + ": mask count");
    for (std::size_t c = 0; c < m.characters.size(); ++c) {
      bool eq = m.characters[c].raster_id == fx.characters[c];
      for (std::size_t i = 0; i < fx.frame.id.data.size() && eq; ++i) {
        eq = m.characters[c].alpha.data[i] == (fx.frame.id.data[i] == fx.characters[c] ? 255 : 0);
      }
      out.expect(eq, fx.name + ": mask " + std::to_string(fx.characters[c]) + " differs from the id test");
    }
    bool bg = true;
    for (std::size_t i = 0; i < fx.frame.id.data.size() && bg; ++i) {
      const bool is_char = std::find(fx.characters.begin(), fx.characters.end(), fx.frame.id.data[i]) !=
                           fx.characters.end();
      bg = m.background.data[i] == (is_char ? 0 : 255);
    }
    out.expect(bg, fx.name + ": background differs from the id test");
    check_inversion(out, fx, m, "expand 0 blur 0");
    if (fx.name.rfind("c", 0) == 0) {
      demo_chars += static_cast<int>(fx.characters.size());
      check_inversion(out, fx, raster::masks_from_ids(fx.frame, fx.characters, 15, 4.5), "expand 15 blur 4.5");
      ++sweeps;
    } else {
      for (const auto& [e, b] : sweep) {
        check_inversion(out, fx, raster::masks_from_ids(fx.frame, fx.characters, e, b),
                        "expand " + fmt("%g", e) + " blur " + fmt("%g", b));
        ++sweeps;
      }
    }
  }
  out.expect(demo_chars > 0, "demo frames contain no character pixels");
  out.note(std::to_string(fixtures.size()) + " fixtures (" + std::to_string(demo_chars) +
           " character masks on demo frames), " + std::to_string(sweeps) + " expand/blur settings checked");
}

// 5. Timeline math -------------------------------------------------------------

// Fixed-step integration of held keys at 30 Hz.
std::vector<std::pair<double, Vec3>> integrate_30hz(const std::vector<timeline::InputEvent>& ev, double speed) {
  std::vector<std::pair<double, Vec3>> out;
  std::map<char, bool> held;
  std::size_t next = 0;
  Vec3 pos;
  const double end = ev.back().t;
  const int ticks = static_cast<int>(std::lround(end * 30));
  for (int k = 0; k <= ticks; ++k) {
    const double t = k / 30.0;
    while (next < ev.size() && ev[next].t <= t + 1e-12) {
      held[ev[next].key] = ev[next].down;
      ++next;
    }
    out.push_back({t, pos});
    Vec3 dir{(held['D'] ? 1.0 : 0.0) - (held['A'] ? 1.0 : 0.0), (held['E'] ? 1.0 : 0.0) - (held['Q'] ? 1.0 : 0.0),
             (held['S'] ? 1.0 : 0.0) - (held['W'] ? 1.0 : 0.0)};
    const double n = std::sqrt(dir.x * dir.x + dir.y * dir.y + dir.z * dir.z);
    if (n > 0) pos += dir * (speed / 30.0 / n);
  }
  return out;
}

void timeline_math(Outcome& out) {
  using namespace timeline;
  Track t;
  t.id = "ct";
  t.kind = TrackKind::kCamera;
  t.target_id = "cam";
  t = add_keyframe(t, {0, Transform{{0, 0, 0}, {}, {1, 1, 1}}});
  t = add_keyframe(t, {2, Transform{{2, 0, 0}, {}, {1, 1, 1}}});
  const auto mid = std::get<Transform>(sample_track(t, 1)).translation;
  out.expect(std::abs(mid.x - 1) <= 1e-6 && std::abs(mid.y) <= 1e-6 && std::abs(mid.z) <= 1e-6, "midpoint");
  const auto late = std::get<Transform>(sample_track(t, 5)).translation;
  out.expect(std::abs(late.x - 2) <= 1e-6 && std::abs(late.y) <= 1e-6 && std::abs(late.z) <= 1e-6, "clamp after");
  const auto early = std::get<Transform>(sample_track(t, -1)).translation;
  out.expect(std::abs(early.x) <= 1e-6, "clamp before");

  Track r = t;
  r.keyframes.clear();
  r = add_keyframe(r, {0, Transform{}});
  r = add_keyframe(r, {1, Transform{{}, Quat::from_axis_angle({0, 1, 0}, std::numbers::pi / 2), {1, 1, 1}}});
  const Quat half = std::get<Transform>(sample_track(r, 0.5)).rotation;
  // Axis-angle oracle: 45 degrees about +Y is (cos 22.5, 0, sin 22.5, 0).
  const double h = std::numbers::pi / 8;
  const double dotq = std::abs(half.w * std::cos(h) + half.y * std::sin(h));
  const double err_deg = 2 * std::acos(std::min(1.0, dotq)) * 180 / std::numbers::pi;
  const double angle_deg = 2 * std::acos(std::min(1.0, std::abs(half.w))) * 180 / std::numbers::pi;
  out.expect(std::abs(angle_deg - 45) <= 1e-6, "slerp angle " + fmt("%.9f", angle_deg));
  out.expect(err_deg <= 1e-6, "slerp axis error " + fmt("%.3g deg", err_deg));

  const std::vector<InputEvent> square = {{0, 'W', true}, {1, 'W', false}, {1, 'D', true}, {2, 'D', false},
                                          {2, 'S', true}, {3, 'S', false}, {3, 'A', true}, {4, 'A', false}};
  const double speed = 1.0;
  const auto path = record_motion_path(square, speed);
  const auto oracle = integrate_30hz(square, speed);
  const Vec3 gap = path.samples.back().translation - path.samples.front().translation;
  const double closure = std::sqrt(dot(gap, gap));
  double worst = 0;
  for (const auto& [tt, want] : oracle) {
    const auto got = sample_path(path, tt);
    if (!got) {
      worst = 1e9;
      break;
    }
    const Vec3 d = got->translation - want;
    worst = std::max(worst, std::sqrt(dot(d, d)));
  }
  const Vec3 end_gap = oracle.back().second - oracle.front().second;
  out.expect(std::sqrt(dot(end_gap, end_gap)) <= 1e-9, "oracle square does not close");
  out.expect(closure <= 0.02, "square path closes at " + fmt("%.4f m", closure));
  out.expect(worst <= 0.02, "recorded path leaves the 30 Hz oracle by " + fmt("%.4f m", worst));
  out.note("midpoint/clamp/slerp within 1e-6; square closes at " + fmt("%.2g m", closure) + ", " +
           std::to_string(path.samples.size()) + " samples, max deviation from 30 Hz oracle " + fmt("%.2g m", worst));
}

// 6. Skeleton round trip and similarity -------------------------------------------

double dist(const skeleton::Keypoint& a, const skeleton::Keypoint& b) { return std::hypot(a.x - b.x, a.y - b.y); }

void skeleton_props(Outcome& out) {
  using namespace skeleton;
  const auto seq = import_skeleton_sequence(text::read_file(std::string(PREVIZ_FIXTURE_DIR) + "/dialogue_labeled.skel"))
                       .sequence;
  auto layers = split_layers(seq);
  out.expect(layers.size() == 3, "fixture has " + std::to_string(layers.size()) + " layers");
  for (auto& l : layers) l = transform_layer(l, {0, 0}, 1, {0.5, 0.5}).layer;
  const auto back = recomposite(layers, seq.fps, static_cast<double>(seq.frames.size()) / seq.fps);
  out.expect(back.frames.size() == seq.frames.size(), "frame count");
  double worst = 0;
  bool same_people = back.frames.size() == seq.frames.size();
  for (std::size_t f = 0; f < seq.frames.size() && same_people; ++f) {
    same_people = back.frames[f].persons.size() == seq.frames[f].persons.size();
    for (std::size_t p = 0; p < seq.frames[f].persons.size() && same_people; ++p) {
      const auto& a = back.frames[f].persons[p];
      const auto& b = seq.frames[f].persons[p];
      same_people = a.person_id == b.person_id;
      for (int j = 0; j < 18; ++j) {
        worst = std::max({worst, std::abs(a.joints[j].x - b.joints[j].x), std::abs(a.joints[j].y - b.joints[j].y),
                          std::abs(a.joints[j].confidence - b.joints[j].confidence)});
      }
    }
  }
  out.expect(same_people, "persons differ after the round trip");
  out.expect(worst <= 1e-6, "round trip error " + fmt("%.3g", worst));

  Gen g(1000);
  long pairs = 0;
  double worst_ratio = 0;
  for (int i = 0; i < 1000; ++i) {
    SkeletonLayer l;
    l.person_id = g.integer(0, 5);
    for (int f = g.integer(1, 6); f > 0; --f) {
      if (g.integer(0, 5) == 0) {
        l.frames.push_back(std::nullopt);
        continue;
      }
      PersonPose p;
      p.person_id = l.person_id;
      const double cx = g.uniform(0.2, 0.8), cy = g.uniform(0.2, 0.8);
      for (auto& k : p.joints) k = {cx + g.uniform(-0.1, 0.1), cy + g.uniform(-0.2, 0.2), g.uniform(0.3, 1)};
      l.frames.push_back(p);
    }
    const double s = g.uniform(0.05, 4);
    const Point2 tr{g.uniform(-1, 1), g.uniform(-1, 1)};
    const Point2 anchor{g.uniform(-0.5, 1.5), g.uniform(-0.5, 1.5)};
    const auto res = transform_layer(l, tr, s, anchor);
    for (std::size_t f = 0; f < l.frames.size(); ++f) {
      if (!l.frames[f]) {
        out.expect(!res.layer.frames[f], "empty frame filled");
        continue;
      }
      const auto& a = l.frames[f]->joints;
      const auto& b = res.layer.frames[f]->joints;
      // Ratios of every joint-pair distance to a reference pair are preserved.
      const double ref_a = dist(a[0], a[1]), ref_b = dist(b[0], b[1]);
      for (int j = 0; j < 18; ++j) {
        for (int k = j + 1; k < 18; ++k) {
          const double ra = dist(a[j], a[k]) / ref_a, rb = dist(b[j], b[k]) / ref_b;
          worst_ratio = std::max(worst_ratio, std::abs(ra - rb) / std::max(ra, 1e-12));
          ++pairs;
        }
      }
      out.expect(std::abs(ref_b / ref_a - s) <= 1e-9 * s, "scale factor");
    }
  }
  out.expect(worst_ratio <= 1e-9, "distance ratio drift " + fmt("%.3g", worst_ratio));
  out.note("round trip max error " + fmt("%.2g", worst) + " over " + std::to_string(seq.frames.size()) +
           " frames; 1000 layers, " + std::to_string(pairs) + " joint pairs, max ratio drift " + fmt("%.2g", worst_ratio));
}

// 7. Walkthrough determinism ------------------------------------------------------

int run(const fs::path& cwd, const std::string& args) {
  const std::string cmd = "cd '" + cwd.string() + "' && '" PREVIZ_CLI "' " + args + " >>log.txt 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// sha256 of each artifact, keyed by path relative to `root`.
std::map<std::string, std::string> artifact_hashes(const fs::path& root, const std::vector<std::string>& entries) {
  std::map<std::string, std::string> out;
  for (const auto& e : entries) {
    const fs::path p = root / e;
    if (fs::is_regular_file(p)) {
      out[e] = sha256_hex(text::read_file(p.string()));
      continue;
    }
    if (!fs::is_directory(p)) continue;
    for (const auto& f : fs::recursive_directory_iterator(p)) {
      if (f.is_regular_file()) out[fs::relative(f.path(), root).string()] = sha256_hex(text::read_file(f.path().string()));
    }
  }
  return out;
}

void walkthrough(Outcome& out) {
  const auto t0 = std::chrono::steady_clock::now();
  auto fields = service::args::fields_json(project::demo_prompt_fields());
  fields["seed"] = project::demo::kSeed;
  std::map<std::string, std::string> hashes[2];
  for (int i = 0; i < 2; ++i) {
    const auto dir = scratch("walkthrough" + std::to_string(i));
    std::ofstream(dir / "fields.json") << fields.dump(2);
    const std::string steps[] = {
        "demo -o w.previz",
        "render w.previz --clip c1 --fps 16 -o frames",
        "restyle w.previz --clip c1 --level Faithful --frame 16 --fields fields.json -o keyframe.png",
        "generate w.previz --clip c1 --mode Resemble --fields fields.json -o video",
    };
    for (const auto& s : steps) {
      const int code = run(dir, s);
      out.expect(code == 0, "run " + std::to_string(i + 1) + ": 'previz " + s + "' exited " + std::to_string(code));
      if (code != 0) return;
    }
    for (const char* ch : {"color", "depth", "id", "pose"}) {
      int n = 0;
      for (const auto& f : fs::directory_iterator(dir / "frames")) n += f.path().filename().string().rfind(ch, 0) == 0;
      out.expect(n == 32, std::string(ch) + " has " + std::to_string(n) + " frames");
    }
    int video = 0;
    for (const auto& f : fs::directory_iterator(dir / "video")) video += f.path().extension() == ".png";
    out.expect(video == 32, "video has " + std::to_string(video) + " frames");
    hashes[i] = artifact_hashes(dir, {"frames", "keyframe.png", "video", "w.assets"});
  }
  const double secs = seconds_since(t0);
  out.expect(hashes[0].size() > 0 && hashes[0].size() == hashes[1].size(), "artifact sets differ in size");
  int differ = 0;
  for (const auto& [k, v] : hashes[0]) {
    const auto it = hashes[1].find(k);
    if (it == hashes[1].end() || it->second != v) {
      ++differ;
      out.expect(false, "artifact differs: " + k);
    }
  }
  std::string digest;
  for (const auto& [k, v] : hashes[0]) digest += k + " " + v + "\n";
  out.expect(secs < 120, "runtime " + fmt("%.1f s", secs));
  out.note(std::to_string(hashes[0].size()) + " artifacts identical across 2 runs (digest " +
           sha256_hex(digest).substr(0, 16) + "), 32 frames per channel, " + fmt("%.1f s", secs) +
           "; other platforms not exercised here");
}

// 8. Service contract -------------------------------------------------------------

class Contract {
 public:
  Contract(int port, Outcome& out) : api(port), out_(out) {}

  // Sends a request and checks the status; 0 accepts any 2xx.
  testing::Reply call(const std::string& method, const std::string& path, const json& body = json::object(),
                      int expect = 0, std::optional<std::string> if_match = std::nullopt) {
    testing::Reply r;
    if (method == "GET") r = api.get(path);
    if (method == "POST") r = api.post(path, body, if_match);
    if (method == "PUT") r = api.put(path, body, if_match);
    if (method == "PATCH") r = api.patch(path, body, if_match);
    if (method == "DELETE") r = api.del(path, if_match);
    const bool ok = expect ? r.status == expect : r.status / 100 == 2;
    out_.expect(ok, method + " " + path + " -> " + std::to_string(r.status) + " " + r.raw.substr(0, 160));
    if (g_verbose) std::cerr << method << " " << path << " " << r.status << "\n";
    if (r.status >= 400) {
      out_.expect(r.body.is_object() && r.body.value("error", json()).is_string() &&
                      r.body.value("message", json()).is_string(),
                  method + " " + path + ": error body lacks error/message");
    }
    return r;
  }

  // A write against the project's current version; checks the version bump.
  testing::Reply write(const std::string& method, const std::string& path, const json& body = json::object(),
                       int expect = 0) {
    const auto r = call(method, path, body, expect, tag);
    if (r.status / 100 == 2) {
      out_.expect(r.etag == "\"" + std::to_string(version(tag) + 1) + "\"", path + ": version did not advance by one");
      tag = r.etag;
    }
    return r;
  }

  void refresh(const std::string& project_path) { tag = api.get(project_path).etag; }

  static long version(const std::string& etag) { return std::stol(etag.substr(1, etag.size() - 2)); }

  testing::Api api;
  std::string tag;

 private:
  Outcome& out_;
};

bool stream_ok(Outcome& out, const std::vector<testing::SseEvent>& ev, const std::string& final, const std::string& what) {
  bool ok = ev.size() >= 2;
  double last = -1;
  for (std::size_t i = 0; ok && i + 1 < ev.size(); ++i) {
    const double p = ev[i].data.value("progress", -1.0);
    ok = ev[i].event == "progress" && p >= last && p <= 1;
    last = p;
  }
  ok = ok && ev.back().event == final;
  out.expect(ok, what + ": stream not monotone or did not end in " + final);
  return ok;
}

void service_contract(Outcome& out) {
  service::ServiceConfig cfg;
  cfg.backend = "stub";
  cfg.stub = {1, std::chrono::milliseconds(250)};
  cfg.event_interval = std::chrono::milliseconds(10);
  const auto dir = scratch("service");
  cfg.project_dir = dir.string();
  service::Service svc(cfg);
  const int port = svc.start();
  Contract c(port, out);
  const std::string P = "/api/v1/projects", K = P + "/k", S = K + "/scenes/s", T = K + "/timelines/t";
  const json xf = {{"translation", {0, 0.9, -4}}, {"rotation", {1, 0, 0, 0}}, {"scale", {1, 1, 1}}};
  const json fields = {{"style", "Cinematic"},
                       {"background_description", "a small grey office"},
                       {"characters", {{{"character_id", "hero"}, {"description", "pacing"}}}},
                       {"seed", 7}};

  c.call("GET", "/api/v1/health");
  auto r = c.call("POST", P, {{"id", "k"}, {"name", "K"}}, 201);
  c.tag = r.etag;
  out.expect(c.tag == "\"1\"", "new project version");
  c.call("POST", P, {{"id", "k"}}, 409);
  c.call("GET", P);
  c.call("GET", K);
  c.call("GET", P + "/missing", {}, 404);

  // Version tokens.
  const json scene = {{"id", "s"}, {"cameras", {{{"id", "cam"}, {"preset", "normal"}}}}};
  r = c.call("POST", K + "/scenes", scene, 428);
  out.expect(r.body.value("error", "") == "StaleVersion", "missing If-Match error name");
  r = c.call("POST", K + "/scenes", scene, 409, "\"99\"");
  out.expect(r.body.value("error", "") == "StaleVersion", "stale write error name");
  c.write("POST", K + "/scenes", scene, 201);
  const std::string before = c.tag;
  r = c.call("POST", K + "/scenes/s/cameras", {{"id", "late"}}, 409, "\"1\"");
  out.expect(r.body.value("error", "") == "StaleVersion", "stale write after a change");
  c.call("POST", K + "/scenes", scene, 409, c.tag);  // DuplicateId
  c.refresh(K);
  out.expect(c.tag == before, "rejected writes changed the version");
  c.call("GET", S);

  // Scene editing.
  r = c.write("POST", S + "/entities",
              {{"id", "hero"}, {"role", "character"}, {"movable", true}, {"character_profile_ref", "hero"},
               {"rig", "humanoid"}, {"geometry", {{"type", "box"}, {"size", {0.5, 1.75, 0.3}}}}, {"transform", xf}},
              201);
  out.expect(r.body.value("raster_id", 0) > 0, "entity raster id");
  c.write("POST", S + "/entities", {{"id", "tmp"}, {"geometry", {{"type", "box"}, {"size", {1, 1, 1}}}}}, 201);
  c.write("DELETE", S + "/entities/tmp");
  c.call("POST", S + "/entities", {{"geometry", {{"type", "sphere"}}}}, 400, c.tag);
  c.call("POST", S + "/entities", {{"id", "bad"}, {"geometry", {{"type", "box"}, {"size", {0, 1, 1}}}}}, 422, c.tag);
  c.write("POST", S + "/cameras", {{"id", "cam2"}, {"preset", "wide"}}, 201);
  c.write("PUT", S + "/cameras/cam2", {{"fov_deg", 50}});
  c.write("POST", S + "/lights", {{"id", "key"}, {"kind", "directional"}, {"intensity", 0.8}}, 201);
  c.write("PUT", S + "/transforms/hero", xf);
  c.write("PATCH", S + "/appearance/hero", {{"color", {0.6, 0.2, 0.2}}});
  r = c.call("GET", S);
  out.expect(r.body["scene"]["cameras"].size() == 2, "scene cameras");

  // Timeline.
  c.write("POST", K + "/timelines", {{"id", "t"}, {"scene_id", "s"}}, 201);
  c.call("GET", T);
  c.write("POST", T + "/tracks", {{"id", "walk"}, {"kind", "element_animation"}, {"target_id", "hero"}}, 201);
  c.write("POST", T + "/tracks/walk/paths",
          {{"record",
            {{"events", {{{"t", 0}, {"key", "D"}, {"down", true}}, {{"t", 1.5}, {"key", "D"}, {"down", false}}}},
             {"speed", 1.0},
             {"start", {0, 0.9, -4}}}}},
          201);
  c.write("POST", T + "/tracks", {{"id", "dolly"}, {"kind", "camera"}, {"target_id", "cam"}}, 201);
  for (double t : {0.0, 2.0}) {
    c.write("POST", T + "/tracks/dolly/keyframes",
            {{"t", t},
             {"value", {{"transform", {{"translation", {0, 1.6, 2 - t}}, {"rotation", {1, 0, 0, 0}}, {"scale", {1, 1, 1}}}}}}},
            201);
  }
  c.write("POST", T + "/clips", {{"id", "a"}, {"camera_id", "cam"}, {"t_in", 0}, {"t_out", 2}}, 201);
  c.write("POST", T + "/clips", {{"id", "b"}, {"camera_id", "cam2"}, {"t_in", 2}, {"t_out", 3}}, 201);
  r = c.write("PUT", T + "/clips/b", {{"t_out", 4}});
  out.expect(r.body.value("frames", 0) == 32, "replaced clip frame count");
  c.call("POST", T + "/clips", {{"id", "x"}, {"camera_id", "cam"}, {"t_in", 1}, {"t_out", 3}}, 422, c.tag);
  r = c.call("GET", T + "/plan?fps=16&t0=0&t1=4");
  out.expect(r.body["frames"].size() == 64, "plan frame count");
  c.write("DELETE", T + "/clips/b");
  r = c.call("GET", T + "/plan?fps=16");
  out.expect(r.body["frames"].size() == 32, "plan after delete");

  // Clip operations.
  r = c.call("POST", K + "/clips/a/capture", {{"frame", 3}, {"width", 64}, {"height", 36}});
  for (const char* k : {"color", "depth", "id", "pose"}) {
    const std::string uri = r.body.value(k, "sha256:");
    c.call("GET", "/api/v1/assets/" + uri.substr(7));
  }
  c.call("POST", K + "/clips/a/capture", {{"frame", 32}}, 422);
  r = c.call("POST", K + "/clips/a/render", {{"width", 48}, {"height", 27}});
  out.expect(r.body["frames"].size() == 32, "render frame count");

  c.call("GET", K + "/styles");
  c.write("PUT", K + "/styles",
          {{"characters", {{{"character_id", "hero"}, {"display_name", "Hero"}, {"identity_prompt", "a courier"}, {"lora", nullptr}}}}});
  r = c.call("POST", "/api/v1/prompt/compose", {{"fields", fields}});
  out.expect(r.body["bundle"].value("background_prompt", "").find("a small grey office") != std::string::npos,
             "composed background prompt");
  r = c.call("GET", "/api/v1/resemblance?total_steps=20");
  const int skips[] = {5, 1, 0, 0};
  const double strengths[] = {0.7, 0.7, 0.7, 0.3};
  for (int i = 0; i < 4 && r.body["levels"].size() == 4; ++i) {
    out.expect(r.body["levels"][i]["skip_steps"] == skips[i] && r.body["levels"][i]["control_strength"] == strengths[i],
               "resemblance table on the wire, row " + std::to_string(i));
  }
  c.call("GET", "/api/v1/resemblance?level=Wild", {}, 400);

  r = c.write("POST", K + "/clips/a/restyle", {{"level", "Strict"}, {"fields", fields}, {"width", 64}, {"height", 36}}, 202);
  out.expect(r.body["guidance"].value("skip_steps", -1) == 5, "restyle guidance on the wire");
  const std::string image_job = r.body.value("job_id", "none");
  c.call("GET", "/api/v1/jobs/" + image_job);
  stream_ok(out, c.api.events("/api/v1/jobs/" + image_job + "/events"), "done", "restyle");
  r = c.call("GET", "/api/v1/jobs/" + image_job + "/result");
  out.expect(r.body["results"].size() == 1, "restyle result count");
  c.call("GET", "/api/v1/jobs/nope", {}, 404);
  c.call("GET", "/api/v1/jobs/nope/events", {}, 404);
  c.refresh(K);

  // Skeletons.
  const auto skel = text::read_file(std::string(PREVIZ_FIXTURE_DIR) + "/dialogue_labeled.skel");
  r = c.api.upload("/api/v1/assets", skel, "text/x-previz-skel");
  out.expect(r.status == 201, "asset upload");
  const std::string hash = r.body.value("hash", "");
  r = c.call("GET", "/api/v1/assets/" + hash);
  out.expect(r.raw == skel, "asset bytes");
  c.call("GET", "/api/v1/assets/" + std::string(64, '0'), {}, 404);
  r = c.write("POST", K + "/skeletons", {{"id", "talk"}, {"asset", hash}}, 201);
  out.expect(r.body["persons"].size() == 3, "skeleton persons");
  c.call("GET", K + "/skeletons/talk");
  r = c.write("POST", K + "/skeletons/talk/crop", {{"t0", 0}, {"t1", 2}});
  out.expect(r.body.value("frames", 0) == 32, "cropped frames");
  r = c.write("POST", K + "/skeletons/talk/split");
  out.expect(r.body["layers"].size() == 3, "split layers");
  c.write("POST", K + "/skeletons/talk/layers/0/transform", {{"translate", {0.05, 0}}, {"scale", 0.9}});
  c.call("POST", K + "/skeletons/talk/layers/9/transform", {{"scale", 1.0}}, 404, c.tag);
  c.write("POST", K + "/skeletons/talk/layers/1/blend", {{"timeline_id", "t"}, {"track_id", "walk"}, {"camera_id", "cam"}});
  r = c.write("POST", K + "/skeletons/talk/recomposite", {{"fps", 16}, {"duration", 2.0}});
  out.expect(r.body.value("frames", 0) == 32, "recomposited frames");

  // Video jobs: one cancelled, one completed.
  const json gen = {{"fields", fields}, {"skeleton_id", "talk"}, {"width", 48}, {"height", 27}};
  r = c.write("POST", K + "/clips/a/generate", gen, 202);
  const std::string cancelled = r.body.value("job_id", "none");
  r = c.call("DELETE", "/api/v1/jobs/" + cancelled);
  out.expect(r.body.value("cancelled", false), "cancel accepted");
  stream_ok(out, c.api.events("/api/v1/jobs/" + cancelled + "/events"), "failed", "cancelled job");
  c.call("GET", "/api/v1/jobs/" + cancelled + "/result", {}, 410);
  c.refresh(K);
  r = c.write("POST", K + "/clips/a/generate", gen, 202);
  const std::string video_job = r.body.value("job_id", "none");
  c.call("GET", "/api/v1/jobs/" + video_job + "/result", {}, 409);
  stream_ok(out, c.api.events("/api/v1/jobs/" + video_job + "/events"), "done", "video job");
  r = c.call("GET", "/api/v1/jobs/" + video_job + "/result");
  out.expect(r.body["results"].size() == 33, "video results plus container");
  c.refresh(K);
  r = c.call("GET", K);
  out.expect(r.body["project"]["timelines"][0]["clips"][0]["status"] == "generated", "clip status after generate");
  r = c.call("GET", K + "/validate");
  out.expect(r.body.value("valid", false), "project valid");

  // Whole-project writes, persistence and deletion.
  r = c.call("GET", K);
  json doc = r.body["project"];
  doc["name"] = "Renamed";
  c.write("PUT", K, {{"project", doc}});
  const std::string file = (dir / "k.previz").string();
  r = c.call("POST", K + "/save", {{"path", file}});
  const json saved = c.api.get(K).body["project"];
  c.call("DELETE", K, {}, 409, "\"1\"");
  r = c.call("DELETE", K, {}, 200, c.tag);  // a deleted project has no version left to report
  out.expect(r.body.value("deleted", "") == "k", "delete body");
  c.call("GET", K, {}, 404);
  r = c.call("POST", P + "/open", {{"path", "k.previz"}}, 201);
  out.expect(c.api.get(K).body["project"] == saved, "reopened project differs");
  r = c.call("GET", K + "/validate");
  out.expect(r.body.value("valid", false), "reopened project valid");
  r = c.call("POST", P, {{"demo", true}}, 201);
  out.expect(r.body.value("id", "") == "hacker-scene", "demo project id");

  // Every registered route was exercised.
  std::vector<std::string> missing;
  for (const auto& route : svc.routes()) {
    const auto space = route.find(' ');
    const std::string method = route.substr(0, space);
    const std::string pattern = std::regex_replace(route.substr(space + 1), std::regex(":[a-z]+"), "[^/]+");
    const std::regex re(pattern);
    bool hit = false;
    for (const auto& call : c.api.calls) {
      const auto sp = call.find(' ');
      hit |= call.substr(0, sp) == method && std::regex_match(call.substr(sp + 1), re);
    }
    if (!hit) missing.push_back(route);
  }
  for (const auto& m : missing) out.expect(false, "route not exercised: " + m);
  svc.stop();
  out.note(std::to_string(svc.routes().size()) + " routes exercised with " + std::to_string(c.api.calls.size()) +
           " requests; 428 without If-Match, 409 on stale writes, streams monotone to done/failed");
}

// 9. Persistence ------------------------------------------------------------------

void persistence(Outcome& out) {
  Gen g(9009);
  const auto dir = scratch("persistence");
  int equal = 0;
  for (int i = 0; i < 100; ++i) {
    const auto p = testing::random::random_project(g);
    const std::string path = (dir / ("p" + std::to_string(i) + ".previz")).string();
    project::save_project(p, path);
    const auto q = project::load_project(path);
    const bool same = q == p;
    out.expect(same, "project " + std::to_string(i) + " differs after load(save(p))");
    // Field-by-field equality through the document form as a second witness.
    out.expect(json::parse(project::to_json(q)) == json::parse(project::to_json(p)),
               "project " + std::to_string(i) + " documents differ");
    equal += same;
  }
  out.note(std::to_string(equal) + "/100 random projects deep-equal after a save/load cycle");
}

struct Criterion {
  int number;
  const char* name;
  std::function<void(Outcome&)> fn;
};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--verbose") g_verbose = true;
    if (a == "--only" && i + 1 < argc) only.insert(std::atoi(argv[++i]));
  }
  const std::vector<Criterion> criteria = {
      {1, "resemblance table exact", resemblance_table},
      {2, "adherence monotone on the demo frame", adherence},
      {3, "rasterizer matches the ray-cast oracle", rasterizer},
      {4, "mask pipeline identities", masks},
      {5, "timeline math", timeline_math},
      {6, "skeleton round trip and similarity", skeleton_props},
      {7, "walkthrough determinism", walkthrough},
      {8, "service contract", service_contract},
      {9, "project persistence", persistence},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.number)) continue;
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.fn(out);
    } catch (const std::exception& e) {
      out.expect(false, std::string("exception: ") + e.what());
    }
    const double secs = seconds_since(t0);
    failures += !out.ok();
    std::printf("%s  %d. %-40s %s [%d checks, %.2f s]\n", out.ok() ? "PASS" : "FAIL", c.number, c.name,
                out.detail().c_str(), out.checks(), secs);
    for (const auto& n : out.notes()) std::printf("        - %s\n", n.c_str());
    std::fflush(stdout);
  }
  fs::remove_all(fs::temp_directory_path() / ("previz-acceptance-" + std::to_string(::getpid())));
  return failures;
}
