// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

#include "skeleton/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "common/error.hpp"
#include "common/text.hpp"

namespace previz::skeleton {
namespace {

constexpr double kTimeEps = 1e-9;

[[noreturn]] void schema_error(std::size_t line, const std::string& what) {
  fail(Errc::kSchemaError, "line " + std::to_string(line) + ": " + what);
}

double require_number(const std::string& token, std::size_t line) {
  const auto v = text::parse_double(token);
  if (!v || !std::isfinite(*v)) schema_error(line, "expected a finite number, got '" + token + "'");
  return *v;
}

long long require_int(const std::string& token, std::size_t line) {
  const auto v = text::parse_int(token);
  if (!v) schema_error(line, "expected an integer, got '" + token + "'");
  return *v;
}

bool visible(const Keypoint& k) { return k.confidence > 0; }

bool inside_unit(const Keypoint& k) { return k.x >= 0 && k.x <= 1 && k.y >= 0 && k.y <= 1; }

double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

void sort_persons(SkeletonFrame& frame) {
  std::stable_sort(frame.persons.begin(), frame.persons.end(),
                   [](const PersonPose& a, const PersonPose& b) { return a.person_id < b.person_id; });
}

}  // namespace

std::vector<std::int64_t> SkeletonSequence::person_ids() const {
  std::set<std::int64_t> ids;
  for (const auto& f : frames) {
    for (const auto& p : f.persons) ids.insert(p.person_id);
  }
  return {ids.begin(), ids.end()};
}

std::optional<Point2> root_point(const PersonPose& pose) {
  const auto& j = pose.joints;
  const Keypoint& rh = j[body::kRightHip];
  const Keypoint& lh = j[body::kLeftHip];
  if (visible(rh) && visible(lh)) return Point2{(rh.x + lh.x) / 2, (rh.y + lh.y) / 2};
  if (visible(rh)) return Point2{rh.x, rh.y};
  if (visible(lh)) return Point2{lh.x, lh.y};
  if (visible(j[body::kNeck])) return Point2{j[body::kNeck].x, j[body::kNeck].y};
  Point2 sum;
  int n = 0;
  for (const auto& k : j) {
    if (!visible(k)) continue;
    sum.x += k.x;
    sum.y += k.y;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return Point2{sum.x / n, sum.y / n};
}

ImportResult import_skeleton_sequence(std::string_view document) {
  ImportResult result;
  SkeletonSequence& seq = result.sequence;
  const auto lines = text::split_lines(document);
  std::size_t li = 0;
  // Returns the next non-blank, non-comment line as tokens.
  auto next = [&](std::size_t& line_no) -> std::optional<std::vector<std::string>> {
    while (li < lines.size()) {
      const auto t = text::trim(lines[li++]);
      if (t.empty() || t.front() == '#') continue;
      line_no = li;
      return text::tokenize(t);
    }
    return std::nullopt;
  };

  std::size_t ln = 0;
  auto header = next(ln);
  if (!header || header->size() != 1 || (*header)[0] != kSchema) {
    fail(Errc::kSchemaError, "missing 'previz-skel/1' header");
  }

  std::optional<double> fps;
  std::optional<long long> frame_count;
  bool have_source = false;
  std::optional<std::vector<std::string>> tok;
  while ((tok = next(ln))) {
    const auto& t = *tok;
    if (t[0] == "fps" && t.size() == 2) {
      fps = require_number(t[1], ln);
    } else if (t[0] == "source" && t.size() == 3) {
      seq.source_width = static_cast<int>(require_int(t[1], ln));
      seq.source_height = static_cast<int>(require_int(t[2], ln));
      have_source = true;
    } else if (t[0] == "offset" && t.size() == 2) {
      seq.time_offset = require_number(t[1], ln);
    } else if (t[0] == "frames" && t.size() == 2) {
      frame_count = require_int(t[1], ln);
      break;
    } else {
      schema_error(ln, "unexpected header record '" + t[0] + "'");
    }
  }
  if (!fps || !frame_count || !have_source) {
    fail(Errc::kSchemaError, "header needs fps, source and frames records");
  }
  if (!(*fps > 0)) fail(Errc::kSchemaError, "fps must be > 0");
  if (seq.source_width < 1 || seq.source_height < 1) {
    fail(Errc::kSchemaError, "source size must be positive");
  }
  if (!(seq.time_offset >= 0)) fail(Errc::kSchemaError, "offset must be >= 0");
  if (*frame_count < 0) fail(Errc::kSchemaError, "frame count must be >= 0");
  if (*frame_count == 0) fail(Errc::kEmptySequence, "sequence has no frames");
  seq.fps = *fps;

  bool any_unlabeled = false;
  for (long long f = 0; f < *frame_count; ++f) {
    tok = next(ln);
    if (!tok) fail(Errc::kSchemaError, "document ends before frame " + std::to_string(f));
    const auto& t = *tok;
    if (t.size() != 3 || t[0] != "frame") schema_error(ln, "expected 'frame <index> <persons>'");
    if (require_int(t[1], ln) != f) schema_error(ln, "frames must be numbered consecutively from 0");
    const long long persons = require_int(t[2], ln);
    if (persons < 0) schema_error(ln, "negative person count");
    SkeletonFrame frame;
    std::set<std::int64_t> seen;
    for (long long p = 0; p < persons; ++p) {
      tok = next(ln);
      if (!tok) fail(Errc::kSchemaError, "document ends inside frame " + std::to_string(f));
      const auto& pt = *tok;
      if (pt.size() != 2 + 3 * body::kJointCount || pt[0] != "person") {
        schema_error(ln, "expected 'person <id|?>' followed by 54 numbers");
      }
      PersonPose pose;
      if (pt[1] == "?") {
        any_unlabeled = true;
      } else {
        pose.person_id = require_int(pt[1], ln);
        if (pose.person_id < 0) schema_error(ln, "person id must be >= 0");
        if (!seen.insert(pose.person_id).second) schema_error(ln, "duplicate person id in frame");
      }
      for (int j = 0; j < body::kJointCount; ++j) {
        Keypoint k{require_number(pt[2 + 3 * j], ln), require_number(pt[3 + 3 * j], ln),
                   require_number(pt[4 + 3 * j], ln)};
        const Keypoint raw = k;
        k.x = std::clamp(k.x, 0.0, 1.0);
        k.y = std::clamp(k.y, 0.0, 1.0);
        k.confidence = std::clamp(k.confidence, 0.0, 1.0);
        if (!(k == raw)) ++result.warnings;
        pose.joints[j] = k;
      }
      frame.persons.push_back(pose);
    }
    seq.frames.push_back(std::move(frame));
  }
  if (next(ln)) schema_error(ln, "trailing content after the last frame");

  if (any_unlabeled) assign_person_ids(seq);
  for (auto& f : seq.frames) sort_persons(f);
  return result;
}

std::string export_skeleton_sequence(const SkeletonSequence& seq) {
  std::string out;
  out += kSchema;
  out += "\nfps " + text::format_double(seq.fps);
  out += "\nsource " + std::to_string(seq.source_width) + " " + std::to_string(seq.source_height);
  if (seq.time_offset != 0) out += "\noffset " + text::format_double(seq.time_offset);
  out += "\nframes " + std::to_string(seq.frames.size()) + "\n";
  for (std::size_t f = 0; f < seq.frames.size(); ++f) {
    const auto& frame = seq.frames[f];
    out += "frame " + std::to_string(f) + " " + std::to_string(frame.persons.size()) + "\n";
    for (const auto& p : frame.persons) {
      out += "person ";
      out += p.person_id < 0 ? std::string("?") : std::to_string(p.person_id);
      for (const auto& k : p.joints) {
        out += ' ' + text::format_double(k.x);
        out += ' ' + text::format_double(k.y);
        out += ' ' + text::format_double(k.confidence);
      }
      out += '\n';
    }
  }
  return out;
}

void assign_person_ids(SkeletonSequence& seq) {
  std::int64_t next_id = 0;
  for (const auto& f : seq.frames) {
    for (const auto& p : f.persons) next_id = std::max(next_id, p.person_id + 1);
  }
  std::map<std::int64_t, Point2> last_root;
  for (auto& frame : seq.frames) {
    std::set<std::int64_t> used;
    for (const auto& p : frame.persons) {
      if (p.person_id < 0) continue;
      used.insert(p.person_id);
      if (auto r = root_point(p)) last_root[p.person_id] = *r;
    }
    struct Candidate {
      double d;
      std::size_t person;
      std::int64_t id;
    };
    std::vector<Candidate> candidates;
    std::vector<std::size_t> unlabeled;
    for (std::size_t i = 0; i < frame.persons.size(); ++i) {
      if (frame.persons[i].person_id >= 0) continue;
      unlabeled.push_back(i);
      const auto r = root_point(frame.persons[i]);
      if (!r) continue;
      for (const auto& [id, last] : last_root) {
        if (used.count(id)) continue;
        const double d = distance(*r, last);
        if (d <= kIdentityGate) candidates.push_back({d, i, id});
      }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.d < b.d; });
    for (const auto& c : candidates) {
      auto& person = frame.persons[c.person];
      if (person.person_id >= 0 || used.count(c.id)) continue;
      person.person_id = c.id;
      used.insert(c.id);
    }
    // New identities are numbered left to right.
    std::vector<std::size_t> fresh;
    for (auto i : unlabeled) {
      if (frame.persons[i].person_id < 0) fresh.push_back(i);
    }
    std::stable_sort(fresh.begin(), fresh.end(), [&](std::size_t a, std::size_t b) {
      const auto ra = root_point(frame.persons[a]), rb = root_point(frame.persons[b]);
      return (ra ? ra->x : 2.0) < (rb ? rb->x : 2.0);
    });
    for (auto i : fresh) frame.persons[i].person_id = next_id++;
    for (auto i : unlabeled) {
      if (auto r = root_point(frame.persons[i])) last_root[frame.persons[i].person_id] = *r;
    }
    sort_persons(frame);
  }
}

SkeletonSequence crop(const SkeletonSequence& seq, double t0, double t1) {
  if (!(t0 >= -kTimeEps) || !(t1 > t0) || !(t1 <= seq.duration() + kTimeEps)) {
    fail(Errc::kEmptyRange, "crop range must satisfy 0 <= t0 < t1 <= duration");
  }
  SkeletonSequence out;
  out.fps = seq.fps;
  out.source_width = seq.source_width;
  out.source_height = seq.source_height;
  std::optional<std::size_t> first;
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    const double t = seq.frame_time(i);
    if (t >= t0 - kTimeEps && t < t1 - kTimeEps) {
      if (!first) first = i;
      out.frames.push_back(seq.frames[i]);
    }
  }
  if (!first) fail(Errc::kEmptyRange, "no frames inside the crop range");
  out.time_offset = std::max(0.0, seq.frame_time(*first) - t0);
  return out;
}

std::vector<SkeletonLayer> split_layers(const SkeletonSequence& seq) {
  SkeletonSequence labeled = seq;
  bool unlabeled = false;
  for (const auto& f : labeled.frames) {
    for (const auto& p : f.persons) unlabeled |= p.person_id < 0;
  }
  if (unlabeled) assign_person_ids(labeled);
  const auto ids = labeled.person_ids();
  if (ids.empty()) fail(Errc::kNoPersons, "sequence contains no persons");
  std::vector<SkeletonLayer> layers;
  for (const auto id : ids) {
    SkeletonLayer layer;
    layer.person_id = id;
    layer.fps = labeled.fps;
    layer.start_time = labeled.time_offset;
    layer.source_width = labeled.source_width;
    layer.source_height = labeled.source_height;
    layer.frames.resize(labeled.frames.size());
    for (std::size_t f = 0; f < labeled.frames.size(); ++f) {
      for (const auto& p : labeled.frames[f].persons) {
        if (p.person_id == id) layer.frames[f] = p;
      }
    }
    layers.push_back(std::move(layer));
  }
  return layers;
}

TransformResult transform_layer(const SkeletonLayer& layer, Point2 translate, double scale,
                                Point2 anchor) {
  if (!(scale > 0) || !std::isfinite(scale)) {
    fail(Errc::kNonPositiveScale, "layer scale must be > 0");
  }
  if (!std::isfinite(translate.x) || !std::isfinite(translate.y) || !std::isfinite(anchor.x) ||
      !std::isfinite(anchor.y)) {
    fail(Errc::kInvalidArgument, "translate and anchor must be finite");
  }
  TransformResult result;
  result.layer = layer;
  const Placement step{translate, scale, anchor};
  const bool identity = scale == 1 && translate.x == 0 && translate.y == 0;
  for (std::size_t f = 0; f < result.layer.frames.size(); ++f) {
    auto& pose = result.layer.frames[f];
    if (!pose) continue;
    for (int j = 0; j < body::kJointCount; ++j) {
      Keypoint& k = pose->joints[j];
      if (!identity) {
        const Point2 p = step.apply({k.x, k.y});
        k.x = p.x;
        k.y = p.y;
      }
      if (visible(k) && !inside_unit(k)) result.flagged.push_back({f, j});
    }
  }
  if (identity) return result;
  const Placement& prev = layer.placement;
  if (prev == Placement{}) {
    result.layer.placement = step;
  } else {
    // Fold both steps into p -> s*p + c.
    const double s = prev.scale * scale;
    const Point2 c1{(1 - prev.scale) * prev.anchor.x + prev.translate.x,
                    (1 - prev.scale) * prev.anchor.y + prev.translate.y};
    const Point2 c{scale * c1.x + (1 - scale) * anchor.x + translate.x,
                   scale * c1.y + (1 - scale) * anchor.y + translate.y};
    result.layer.placement = Placement{c, s, {0, 0}};
  }
  return result;
}

std::optional<Point2> layer_root_centroid(const SkeletonLayer& layer) {
  Point2 sum;
  int n = 0;
  for (const auto& pose : layer.frames) {
    if (!pose) continue;
    if (auto r = root_point(*pose)) {
      sum.x += r->x;
      sum.y += r->y;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return Point2{sum.x / n, sum.y / n};
}

SkeletonLayer resample_layer(const SkeletonLayer& layer, double fps) {
  if (!(fps > 0)) fail(Errc::kInvalidArgument, "fps must be > 0");
  if (fps == layer.fps) return layer;
  SkeletonLayer out = layer;
  out.fps = fps;
  const std::size_t n = layer.frames.size();
  const auto m = static_cast<std::size_t>(
      std::max<long long>(n > 0 ? 1 : 0, std::llround(static_cast<double>(n) * fps / layer.fps)));
  out.frames.assign(m, std::nullopt);
  for (std::size_t k = 0; k < m; ++k) {
    const auto src = std::min<long long>(
        static_cast<long long>(n) - 1, std::llround(static_cast<double>(k) * layer.fps / fps));
    out.frames[k] = layer.frames[static_cast<std::size_t>(src)];
  }
  return out;
}

SkeletonSequence recomposite(std::span<const SkeletonLayer> layers, double fps, double duration) {
  if (!(fps > 0)) fail(Errc::kInvalidArgument, "fps must be > 0");
  if (!(duration > 0)) fail(Errc::kInvalidArgument, "duration must be > 0");
  SkeletonSequence out;
  out.fps = fps;
  if (layers.empty()) {
    out.frames.resize(static_cast<std::size_t>(std::llround(duration * fps)));
    return out;
  }
  double base = std::numeric_limits<double>::infinity();
  for (const auto& l : layers) {
    if (!(l.fps > 0)) fail(Errc::kInvalidArgument, "layer fps must be > 0");
    base = std::min(base, l.start_time);
  }
  out.time_offset = base;
  out.source_width = layers.front().source_width;
  out.source_height = layers.front().source_height;

  // Later layers reusing an id are renumbered after the largest id.
  std::vector<std::int64_t> ids;
  std::set<std::int64_t> taken;
  std::int64_t next_id = 0;
  for (const auto& l : layers) next_id = std::max(next_id, l.person_id + 1);
  for (const auto& l : layers) {
    ids.push_back(taken.insert(l.person_id).second ? l.person_id : next_id++);
  }

  const auto n = static_cast<std::size_t>(std::llround(duration * fps));
  out.frames.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / fps;
    for (std::size_t li = 0; li < layers.size(); ++li) {
      const auto& l = layers[li];
      const long long idx = std::llround((t + base - l.start_time) * l.fps);
      if (idx < 0 || idx >= static_cast<long long>(l.frames.size())) continue;
      const auto& pose = l.frames[static_cast<std::size_t>(idx)];
      if (!pose) continue;
      PersonPose p = *pose;
      p.person_id = ids[li];
      for (auto& j : p.joints) {
        const bool outside = !inside_unit(j);
        j.x = std::clamp(j.x, 0.0, 1.0);
        j.y = std::clamp(j.y, 0.0, 1.0);
        j.confidence = outside ? 0.0 : std::clamp(j.confidence, 0.0, 1.0);
      }
      out.frames[k].persons.push_back(p);
    }
    sort_persons(out.frames[k]);
  }
  return out;
}

scene::Camera camera_at(const BlockingView& view, double t) {
  scene::Camera cam = view.camera;
  for (const auto& track : view.camera_tracks) {
    if (track.kind != timeline::TrackKind::kCamera || track.keyframes.empty()) continue;
    const auto v = timeline::sample_track(track, t);
    if (const auto* tr = std::get_if<Transform>(&v)) cam.transform = *tr;
    if (const auto* fov = std::get_if<timeline::FovDeg>(&v)) cam.fov_deg = fov->value;
  }
  return cam;
}

std::vector<BlockingSample> blocking_samples(const SkeletonLayer& layer,
                                             const timeline::MotionPath& path,
                                             const BlockingView& view, double fps) {
  if (path.samples.empty()) fail(Errc::kNoOverlap, "motion path is empty");
  const SkeletonLayer l = resample_layer(layer, fps);
  const std::size_t n = l.frames.size();
  std::optional<std::size_t> ref;
  for (std::size_t k = 0; k < n && !ref; ++k) {
    const double t = l.start_time + static_cast<double>(k) / fps;
    if (t >= path.start() - kTimeEps && t <= path.end() + kTimeEps) ref = k;
  }
  if (!ref) fail(Errc::kNoOverlap, "motion path and layer do not overlap in time");

  const scene::Viewport vp{view.width, view.height};
  const double unbounded = std::numeric_limits<double>::infinity();
  auto project = [&](double t) {
    const auto s = timeline::sample_path(path, t);
    const Vec3 world = s->translation + Quat::from_yaw(s->yaw).rotate(view.root_offset);
    return scene::project_point(camera_at(view, t), world, vp, unbounded);
  };
  const double t_ref = l.start_time + static_cast<double>(*ref) / fps;
  const auto ref_proj = project(t_ref);
  if (!ref_proj) fail(Errc::kNoOverlap, "entity is behind the camera at the first shared frame");

  std::vector<BlockingSample> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    out[k].t = l.start_time + static_cast<double>(k) / fps;
    if (const auto p = project(out[k].t)) {
      out[k].root = Point2{p->x / view.width, p->y / view.height};
      out[k].scale = ref_proj->depth / p->depth;
    }
  }
  return out;
}

SkeletonLayer blend_with_blocking(const SkeletonLayer& layer, const timeline::MotionPath& path,
                                  const BlockingView& view, double fps) {
  const auto samples = blocking_samples(layer, path, view, fps);
  SkeletonLayer out = resample_layer(layer, fps);
  for (std::size_t k = 0; k < out.frames.size(); ++k) {
    auto& pose = out.frames[k];
    if (!pose) continue;
    const auto& s = samples[k];
    if (!s.root) {
      for (auto& j : pose->joints) j.confidence = 0;
      continue;
    }
    const auto root = root_point(*pose);
    if (!root) continue;
    for (auto& j : pose->joints) {
      j.x = s.root->x + s.scale * (j.x - root->x);
      j.y = s.root->y + s.scale * (j.y - root->y);
    }
  }
  return out;
}

}  // namespace previz::skeleton
