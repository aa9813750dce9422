// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <map>
#include <set>
#include <string>

#include "common/text.hpp"
#include "scene/scene.hpp"
#include "skeleton/skeleton.hpp"
#include "support/check.hpp"

using namespace previz;
using namespace previz::skeleton;
using previz::testing::Gen;

namespace {

std::string fixture(const char* name) {
  return text::read_file(std::string(PREVIZ_FIXTURE_DIR) + "/" + name);
}

PersonPose random_person(Gen& g, std::int64_t id, double cx, double cy) {
  PersonPose p;
  p.person_id = id;
  for (auto& j : p.joints) j = {cx + g.uniform(-0.08, 0.08), cy + g.uniform(-0.15, 0.15), g.uniform(0.3, 1)};
  return p;
}

std::string single_person_doc(int frames) {
  Gen g(4);
  SkeletonSequence s;
  s.source_width = 640;
  s.source_height = 480;
  for (int f = 0; f < frames; ++f) s.frames.push_back({{random_person(g, 0, 0.5, 0.5)}});
  return export_skeleton_sequence(s);
}

SkeletonLayer random_layer(Gen& g, int frames) {
  SkeletonLayer l;
  l.person_id = g.integer(0, 5);
  l.source_width = 100;
  l.source_height = 100;
  for (int f = 0; f < frames; ++f) {
    if (g.integer(0, 5) == 0) {
      l.frames.push_back(std::nullopt);
    } else {
      l.frames.push_back(random_person(g, l.person_id, g.uniform(0.2, 0.8), g.uniform(0.2, 0.8)));
    }
  }
  return l;
}

double dist(const Keypoint& a, const Keypoint& b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace

TEST_CASE("import a single-person sequence") {
  const auto r = import_skeleton_sequence(single_person_doc(48));
  CHECK(r.sequence.frames.size() == 48);
  CHECK(r.sequence.person_ids() == std::vector<std::int64_t>{0});
  CHECK(r.warnings == 0);
}

TEST_CASE("out-of-range joints are clamped and counted") {
  std::string doc = "previz-skel/1\nfps 16\nsource 10 10\nframes 1\nframe 0 1\nperson 3";
  for (int j = 0; j < 18; ++j) doc += j == 4 ? " 1.3 0.5 1" : " 0.5 0.5 1";
  const auto r = import_skeleton_sequence(doc + "\n");
  CHECK(r.warnings == 1);
  CHECK(r.sequence.frames[0].persons[0].joints[4].x == 1.0);
}

TEST_CASE("malformed documents") {
  CHECK_ERRC(import_skeleton_sequence("previz-skel/2\n"), Errc::kSchemaError);
  CHECK_ERRC(import_skeleton_sequence("previz-skel/1\nfps 16\nsource 1 1\nframes 0\n"), Errc::kEmptySequence);
  CHECK_ERRC(import_skeleton_sequence("previz-skel/1\nfps 16\nsource 1 1\nframes 1\nframe 0 1\nperson 0 1 2\n"),
             Errc::kSchemaError);
  CHECK_ERRC(import_skeleton_sequence("previz-skel/1\nfps 16\nsource 1 1\nframes 2\nframe 0 0\n"),
             Errc::kSchemaError);
  CHECK_ERRC(import_skeleton_sequence("previz-skel/1\nfps -1\nsource 1 1\nframes 1\nframe 0 0\n"),
             Errc::kSchemaError);
}

TEST_CASE("export and import round trip exactly") {
  const auto seq = import_skeleton_sequence(fixture("dialogue_labeled.skel")).sequence;
  const auto again = import_skeleton_sequence(export_skeleton_sequence(seq));
  CHECK(again.sequence == seq);
  CHECK(again.warnings == 0);
}

TEST_CASE("unlabeled dialogue recovers the hand-labeled identities") {
  const auto labeled = import_skeleton_sequence(fixture("dialogue_labeled.skel")).sequence;
  const auto unlabeled = import_skeleton_sequence(fixture("dialogue_unlabeled.skel")).sequence;
  REQUIRE(labeled.frames.size() == unlabeled.frames.size());
  CHECK(unlabeled.person_ids().size() == 3);
  // Match each recovered person to the labeled pose with identical joints,
  // then require the id mapping to be one consistent bijection.
  std::map<std::int64_t, std::int64_t> to_label;
  std::map<std::int64_t, std::int64_t> from_label;
  for (std::size_t f = 0; f < labeled.frames.size(); ++f) {
    const auto& lf = labeled.frames[f];
    const auto& uf = unlabeled.frames[f];
    REQUIRE(lf.persons.size() == uf.persons.size());
    for (const auto& u : uf.persons) {
      const PersonPose* match = nullptr;
      for (const auto& l : lf.persons) {
        if (l.joints == u.joints) match = &l;
      }
      REQUIRE(match);
      auto [it, fresh] = to_label.emplace(u.person_id, match->person_id);
      CHECK(it->second == match->person_id);
      auto [it2, fresh2] = from_label.emplace(match->person_id, u.person_id);
      CHECK(it2->second == u.person_id);
    }
  }
  CHECK(to_label.size() == 3);
}

TEST_CASE("crop") {
  const auto seq = import_skeleton_sequence(fixture("dialogue_labeled.skel")).sequence;
  CHECK(crop(seq, 0, seq.duration()) == seq);
  const auto one = crop(seq, 0.5, 1.5);
  CHECK(one.frames.size() == 16);
  CHECK(one.fps == seq.fps);
  CHECK(one.person_ids() == seq.person_ids());
  CHECK_ERRC(crop(seq, 1, 1), Errc::kEmptyRange);
  CHECK_ERRC(crop(seq, 2, 1), Errc::kEmptyRange);
  CHECK_ERRC(crop(seq, 0, seq.duration() + 1), Errc::kEmptyRange);
}

TEST_CASE("crop composes") {
  const auto seq = import_skeleton_sequence(fixture("dialogue_labeled.skel")).sequence;
  Gen g(41);
  int checked = 0;
  for (int i = 0; i < 500; ++i) {
    const double a = g.uniform(0, seq.duration() * 0.8);
    const double b = g.uniform(a + 0.07, seq.duration());
    SkeletonSequence inner;
    try {
      inner = crop(seq, a, b);
    } catch (const Error&) {
      continue;
    }
    const double c = g.uniform(0, inner.duration() * 0.9);
    const double d = g.uniform(c + 0.01, std::min(inner.duration(), b - a));
    if (!(d > c)) continue;
    std::optional<SkeletonSequence> twice, direct;
    try {
      twice = crop(inner, c, d);
    } catch (const Error& e) {
      CHECK(e.code() == Errc::kEmptyRange);
    }
    try {
      direct = crop(seq, a + c, std::min(b, a + d));
    } catch (const Error& e) {
      CHECK(e.code() == Errc::kEmptyRange);
    }
    REQUIRE(twice.has_value() == direct.has_value());
    if (!twice) continue;
    ++checked;
    CHECK(twice->frames == direct->frames);
    CHECK(twice->time_offset == doctest::Approx(direct->time_offset).epsilon(1e-9));
    CHECK(twice->fps == direct->fps);
  }
  CHECK(checked > 300);
}

TEST_CASE("split_layers") {
  const auto seq = import_skeleton_sequence(fixture("dialogue_labeled.skel")).sequence;
  const auto layers = split_layers(seq);
  REQUIRE(layers.size() == 3);
  for (const auto& l : layers) CHECK(l.placement == Placement{});
  // Person 2 leaves for frames 20-24.
  for (std::size_t f = 0; f < layers[2].frames.size(); ++f) {
    CHECK(layers[2].frames[f].has_value() == !(f >= 20 && f < 25));
  }
  const auto single = split_layers(import_skeleton_sequence(single_person_doc(10)).sequence);
  CHECK(single.size() == 1);

  SkeletonSequence partial;
  partial.frames.resize(30);
  Gen g(2);
  for (int f = 10; f <= 20; ++f) partial.frames[f].persons.push_back(random_person(g, 4, 0.5, 0.5));
  const auto pl = split_layers(partial);
  REQUIRE(pl.size() == 1);
  for (int f = 0; f < 30; ++f) CHECK(pl[0].frames[f].has_value() == (f >= 10 && f <= 20));

  SkeletonSequence empty;
  empty.frames.resize(3);
  CHECK_ERRC(split_layers(empty), Errc::kNoPersons);
}

TEST_CASE("split, identity transform and recomposite round trip") {
  const auto seq = import_skeleton_sequence(fixture("dialogue_labeled.skel")).sequence;
  auto layers = split_layers(seq);
  for (auto& l : layers) l = transform_layer(l, {0, 0}, 1, {0.5, 0.5}).layer;
  const auto back = recomposite(layers, seq.fps, seq.frames.size() / seq.fps);
  CHECK(back.fps == seq.fps);
  CHECK(back.time_offset == seq.time_offset);
  CHECK(back.source_width == seq.source_width);
  CHECK(back.source_height == seq.source_height);
  REQUIRE(back.frames.size() == seq.frames.size());
  for (std::size_t f = 0; f < seq.frames.size(); ++f) {
    REQUIRE(back.frames[f].persons.size() == seq.frames[f].persons.size());
    for (std::size_t p = 0; p < seq.frames[f].persons.size(); ++p) {
      const auto& a = back.frames[f].persons[p];
      const auto& b = seq.frames[f].persons[p];
      CHECK(a.person_id == b.person_id);
      for (int j = 0; j < 18; ++j) {
        CHECK(std::abs(a.joints[j].x - b.joints[j].x) <= 1e-6);
        CHECK(std::abs(a.joints[j].y - b.joints[j].y) <= 1e-6);
        CHECK(a.joints[j].confidence == b.joints[j].confidence);
      }
    }
  }
  // One identity layer equals its source.
  SkeletonSequence solo = seq;
  for (auto& f : solo.frames) {
    std::erase_if(f.persons, [](const PersonPose& p) { return p.person_id != 1; });
  }
  const auto one = split_layers(solo);
  CHECK(recomposite(one, solo.fps, solo.frames.size() / solo.fps) == solo);
}

TEST_CASE("transform_layer") {
  const auto seq = import_skeleton_sequence(fixture("dialogue_labeled.skel")).sequence;
  const auto layer = split_layers(seq)[0];

  SUBCASE("identity") {
    const auto r = transform_layer(layer, {0, 0}, 1, {0.3, 0.3});
    CHECK(r.layer == layer);
    CHECK(r.flagged.empty());
  }
  SUBCASE("half scale about the hip centroid") {
    const auto c = layer_root_centroid(layer);
    REQUIRE(c);
    const auto r = transform_layer(layer, {0, 0}, 0.5, *c);
    for (std::size_t f = 0; f < layer.frames.size(); ++f) {
      const auto& a = *layer.frames[f];
      const auto& b = *r.layer.frames[f];
      for (const auto& limb : body::kLimbs) {
        CHECK(dist(b.joints[limb.a], b.joints[limb.b]) ==
              doctest::Approx(0.5 * dist(a.joints[limb.a], a.joints[limb.b])).epsilon(1e-12));
      }
    }
  }
  SUBCASE("translate right flags joints that leave the frame") {
    const auto r = transform_layer(layer, {0.25, 0}, 1, {0, 0});
    std::vector<FlaggedJoint> expected;
    for (std::size_t f = 0; f < layer.frames.size(); ++f) {
      for (int j = 0; j < 18; ++j) {
        const auto& k = layer.frames[f]->joints[j];
        const auto& m = r.layer.frames[f]->joints[j];
        CHECK(m.x == k.x + 0.25);
        CHECK(m.y == k.y);
        CHECK(m.confidence == k.confidence);
        if (k.confidence > 0 && k.x + 0.25 > 1) expected.push_back({f, j});
      }
    }
    CHECK(r.flagged == expected);
    const auto moved = transform_layer(split_layers(seq)[2], {0.25, 0}, 1, {0, 0});
    CHECK_FALSE(moved.flagged.empty());
  }
  SUBCASE("scale must be positive") {
    CHECK_ERRC(transform_layer(layer, {0, 0}, 0, {0, 0}), Errc::kNonPositiveScale);
    CHECK_ERRC(transform_layer(layer, {0, 0}, -2, {0, 0}), Errc::kNonPositiveScale);
  }
}

TEST_CASE("transform_layer is a similarity over random layers") {
  Gen g(1000);
  for (int i = 0; i < 1000; ++i) {
    const auto layer = random_layer(g, g.integer(1, 6));
    const double s = g.uniform(0.05, 4);
    const Point2 t{g.uniform(-1, 1), g.uniform(-1, 1)};
    const Point2 anchor{g.uniform(-0.5, 1.5), g.uniform(-0.5, 1.5)};
    const auto r = transform_layer(layer, t, s, anchor);
    for (std::size_t f = 0; f < layer.frames.size(); ++f) {
      if (!layer.frames[f]) {
        CHECK_FALSE(r.layer.frames[f]);
        continue;
      }
      const auto& a = layer.frames[f]->joints;
      const auto& b = r.layer.frames[f]->joints;
      for (int j = 0; j < 18; ++j) {
        CHECK(b[j].confidence == a[j].confidence);
        const int k = (j + 7) % 18;
        const double d0 = dist(a[j], a[k]);
        if (d0 > 1e-9) CHECK(dist(b[j], b[k]) / d0 == doctest::Approx(s).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("recomposite with a background layer") {
  const auto seq = import_skeleton_sequence(fixture("dialogue_labeled.skel")).sequence;
  auto layers = split_layers(seq);
  const Point2 anchor = *layer_root_centroid(layers[2]);
  const Point2 shift{-0.1, -0.12};
  const auto moved = transform_layer(layers[2], shift, 0.6, anchor);
  layers[2] = moved.layer;
  const auto out = recomposite(layers, seq.fps, seq.frames.size() / seq.fps);
  for (std::size_t f = 0; f < out.frames.size(); ++f) {
    CHECK(out.frames[f].persons.size() == seq.frames[f].persons.size());
    for (const auto& p : out.frames[f].persons) {
      if (p.person_id != 2) continue;
      const auto* src = &seq.frames[f].persons.back();
      REQUIRE(src->person_id == 2);
      for (int j = 0; j < 18; ++j) {
        const double x = anchor.x + 0.6 * (src->joints[j].x - anchor.x) + shift.x;
        const double y = anchor.y + 0.6 * (src->joints[j].y - anchor.y) + shift.y;
        const bool inside = x >= 0 && x <= 1 && y >= 0 && y <= 1;
        CHECK(p.joints[j].x == doctest::Approx(std::clamp(x, 0.0, 1.0)).epsilon(1e-12));
        CHECK(p.joints[j].y == doctest::Approx(std::clamp(y, 0.0, 1.0)).epsilon(1e-12));
        CHECK(p.joints[j].confidence == (inside ? src->joints[j].confidence : 0.0));
      }
    }
  }
}

namespace {

struct BlockingFixture {
  BlockingView view;
  scene::Camera cam;
  BlockingFixture() {
    cam = scene::make_camera("cam", scene::CameraPreset::kNormal, {});
    cam.transform.translation = {0, 1.5, 5};
    view.camera = cam;
    view.width = 320;
    view.height = 180;
  }
  Point2 project(const timeline::PathSample& s) const {
    const Vec3 w = s.translation + Quat::from_yaw(s.yaw).rotate(view.root_offset);
    const auto p = scene::project_point(cam, w, {view.width, view.height});
    REQUIRE(p);
    return {p->x / view.width, p->y / view.height};
  }
  double depth(const timeline::PathSample& s) const {
    const Vec3 w = s.translation + Quat::from_yaw(s.yaw).rotate(view.root_offset);
    return scene::project_point(cam, w, {view.width, view.height})->depth;
  }
};

SkeletonLayer layer_at(Point2 root, int frames) {
  Gen g(12);
  SkeletonLayer l;
  l.person_id = 0;
  for (int f = 0; f < frames; ++f) {
    PersonPose p = random_person(g, 0, root.x, root.y - 0.1);
    p.joints[body::kRightHip] = {root.x - 0.02, root.y, 1};
    p.joints[body::kLeftHip] = {root.x + 0.02, root.y, 1};
    l.frames.push_back(p);
  }
  return l;
}

}  // namespace

TEST_CASE("blend_with_blocking") {
  BlockingFixture fx;
  SUBCASE("static path at the projected position is a fixed point") {
    timeline::MotionPath path;
    path.entity_id = "hero";
    path.samples = {{0, {0.3, 0, -2}, 0}, {2, {0.3, 0, -2}, 0}};
    const auto layer = layer_at(fx.project(path.samples[0]), 32);
    const auto out = blend_with_blocking(layer, path, fx.view, 16);
    REQUIRE(out.frames.size() == layer.frames.size());
    for (std::size_t f = 0; f < out.frames.size(); ++f) {
      for (int j = 0; j < 18; ++j) {
        CHECK(std::abs(out.frames[f]->joints[j].x - layer.frames[f]->joints[j].x) <= 1e-6);
        CHECK(std::abs(out.frames[f]->joints[j].y - layer.frames[f]->joints[j].y) <= 1e-6);
      }
    }
  }
  SUBCASE("walking away shrinks the skeleton by the depth ratio") {
    timeline::MotionPath path;
    path.entity_id = "hero";
    path.samples = {{0, {0, 0, 0}, 0}, {2, {-0.8, 0, -6}, 0}};
    const auto layer = layer_at({0.5, 0.6}, 32);
    const auto out = blend_with_blocking(layer, path, fx.view, 16);
    const auto samples = blocking_samples(layer, path, fx.view, 16);
    const double ref = fx.depth(*timeline::sample_path(path, 0));
    double prev_scale = 1e9;
    for (std::size_t f = 0; f < out.frames.size(); ++f) {
      const double t = f / 16.0;
      const auto ps = *timeline::sample_path(path, t);
      const Point2 want = fx.project(ps);
      const auto root = *root_point(*out.frames[f]);
      CHECK(root.x == doctest::Approx(want.x).epsilon(1e-9));
      CHECK(root.y == doctest::Approx(want.y).epsilon(1e-9));
      const double scale = ref / fx.depth(ps);
      CHECK(samples[f].scale == doctest::Approx(scale).epsilon(1e-12));
      CHECK(scale < prev_scale);
      prev_scale = scale;
      const auto& a = layer.frames[f]->joints;
      const auto& b = out.frames[f]->joints;
      CHECK(dist(b[body::kNeck], b[body::kNose]) ==
            doctest::Approx(scale * dist(a[body::kNeck], a[body::kNose])).epsilon(1e-9));
    }
  }
  SUBCASE("path entirely before the layer") {
    timeline::MotionPath path;
    path.entity_id = "hero";
    path.samples = {{0, {0, 0, 0}, 0}, {1, {0, 0, -1}, 0}};
    auto layer = layer_at({0.5, 0.5}, 16);
    layer.start_time = 3;
    CHECK_ERRC(blend_with_blocking(layer, path, fx.view, 16), Errc::kNoOverlap);
  }
}
