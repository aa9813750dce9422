// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

#include "timeline/timeline.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "common/error.hpp"
#include "common/text.hpp"

namespace previz::timeline {
namespace {

constexpr double kTimeEps = 1e-9;

double smoothstep(double u) { return u * u * (3 - 2 * u); }

double wrap_angle(double a) {
  while (a > std::numbers::pi) a -= 2 * std::numbers::pi;
  while (a < -std::numbers::pi) a += 2 * std::numbers::pi;
  return a;
}

KeyValue interpolate(const KeyValue& a, const KeyValue& b, double u) {
  if (const auto* ta = std::get_if<Transform>(&a)) {
    const auto& tb = std::get<Transform>(b);
    Transform out;
    out.translation = lerp(ta->translation, tb.translation, u);
    out.rotation = slerp(ta->rotation, tb.rotation, u);
    out.scale = lerp(ta->scale, tb.scale, u);
    return out;
  }
  if (const auto* fa = std::get_if<FovDeg>(&a)) {
    return FovDeg{fa->value + (std::get<FovDeg>(b).value - fa->value) * u};
  }
  if (const auto* ca = std::get_if<Rgb>(&a)) return lerp(*ca, std::get<Rgb>(b), u);
  const double ia = std::get<Intensity>(a).value;
  return Intensity{ia + (std::get<Intensity>(b).value - ia) * u};
}

Vec3 key_direction(char key) {
  switch (std::toupper(static_cast<unsigned char>(key))) {
    case 'W': return {0, 0, -1};
    case 'S': return {0, 0, 1};
    case 'A': return {-1, 0, 0};
    case 'D': return {1, 0, 0};
    case 'Q': return {0, -1, 0};
    case 'E': return {0, 1, 0};
    default: break;
  }
  fail(Errc::kInvalidArgument, std::string("unsupported motion key '") + key + "'");
}

int key_slot(char key) {
  switch (std::toupper(static_cast<unsigned char>(key))) {
    case 'W': return 0;
    case 'S': return 1;
    case 'A': return 2;
    case 'D': return 3;
    case 'Q': return 4;
    default: return 5;
  }
}

// Synchronized Euclidean distance simplification: a dense sample is dropped
// only if the straight segment between kept neighbours, evaluated at the same
// time, stays within tolerance in position (and yaw, when yaw_tol > 0).
void simplify_range(const std::vector<PathSample>& dense, std::size_t i, std::size_t j,
                    double tol, double yaw_tol, std::vector<bool>& keep) {
  if (j <= i + 1) return;
  double worst = 0;
  std::size_t worst_k = i;
  const double span = dense[j].t - dense[i].t;
  for (std::size_t k = i + 1; k < j; ++k) {
    const double u = (dense[k].t - dense[i].t) / span;
    const Vec3 interp = lerp(dense[i].translation, dense[j].translation, u);
    double err = length(dense[k].translation - interp) / tol;
    if (yaw_tol > 0) {
      const double yaw = dense[i].yaw + wrap_angle(dense[j].yaw - dense[i].yaw) * u;
      err = std::max(err, std::abs(wrap_angle(dense[k].yaw - yaw)) / yaw_tol);
    }
    if (err > worst) {
      worst = err;
      worst_k = k;
    }
  }
  if (worst > 1.0) {
    keep[worst_k] = true;
    simplify_range(dense, i, worst_k, tol, yaw_tol, keep);
    simplify_range(dense, worst_k, j, tol, yaw_tol, keep);
  }
}

std::vector<PathSample> simplify(const std::vector<PathSample>& dense, double tol,
                                 double yaw_tol) {
  std::vector<bool> keep(dense.size(), false);
  keep.front() = keep.back() = true;
  simplify_range(dense, 0, dense.size() - 1, tol, yaw_tol, keep);
  std::vector<PathSample> out;
  for (std::size_t k = 0; k < dense.size(); ++k) {
    if (keep[k]) out.push_back(dense[k]);
  }
  return out;
}

Track* find_track_mut(Timeline& tl, std::string_view id) {
  for (auto& t : tl.tracks) {
    if (t.id == id) return &t;
  }
  fail(Errc::kUnknownId, "unknown track: " + std::string(id));
}

bool overlaps(const Clip& a, const Clip& b) {
  return a.t_in < b.t_out - kTimeEps && b.t_in < a.t_out - kTimeEps;
}

void check_clip_against(const Timeline& tl, const Clip& clip) {
  for (const auto& other : tl.clips) {
    if (other.id == clip.id) continue;
    if (other.camera_id == clip.camera_id && overlaps(other, clip)) {
      fail(Errc::kClipOverlap, "clip " + clip.id + " overlaps " + other.id + " on camera " +
                                   clip.camera_id);
    }
  }
}

void check_unique_id(const Timeline& tl, const std::string& id) {
  if (id.empty()) fail(Errc::kInvalidArgument, "empty id");
  if (tl.find_track(id) || tl.find_clip(id)) fail(Errc::kDuplicateId, "id in use: " + id);
}

}  // namespace

int Clip::frame_count() const { return static_cast<int>(std::lround((t_out - t_in) * fps)); }

const Track* Timeline::find_track(std::string_view id) const {
  for (const auto& t : tracks) {
    if (t.id == id) return &t;
  }
  return nullptr;
}

const Clip* Timeline::find_clip(std::string_view id) const {
  for (const auto& c : clips) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

bool value_matches(Channel channel, const KeyValue& value) {
  switch (channel) {
    case Channel::kTransform: return std::holds_alternative<Transform>(value);
    case Channel::kFov: return std::holds_alternative<FovDeg>(value);
    case Channel::kColor: return std::holds_alternative<Rgb>(value);
    case Channel::kIntensity: return std::holds_alternative<Intensity>(value);
  }
  return false;
}

Track add_keyframe(const Track& track, const Keyframe& kf) {
  if (!std::isfinite(kf.t) || kf.t < 0) fail(Errc::kInvalidArgument, "keyframe time must be >= 0");
  if (!value_matches(track.channel, kf.value)) {
    fail(Errc::kTypeMismatch, "keyframe value does not match channel of track " + track.id);
  }
  if (const auto* tr = std::get_if<Transform>(&kf.value); tr && !tr->valid()) {
    fail(Errc::kInvalidArgument, "invalid transform keyframe");
  }
  if (const auto* c = std::get_if<Rgb>(&kf.value); c && !c->in_unit_range()) {
    fail(Errc::kColorOutOfRange, "keyframe color outside [0,1]");
  }
  if (const auto* f = std::get_if<FovDeg>(&kf.value); f && !(f->value > 1 && f->value < 179)) {
    fail(Errc::kInvalidArgument, "keyframe fov must be in (1, 179)");
  }
  if (const auto* in = std::get_if<Intensity>(&kf.value);
      in && !(std::isfinite(in->value) && in->value >= 0)) {
    fail(Errc::kInvalidArgument, "keyframe intensity must be >= 0");
  }
  for (const auto& k : track.keyframes) {
    if (std::abs(k.t - kf.t) < kTimeEps) {
      fail(Errc::kDuplicateTime, "keyframe already at t=" + text::format_double(kf.t));
    }
  }
  Track out = track;
  auto pos = std::upper_bound(out.keyframes.begin(), out.keyframes.end(), kf.t,
                              [](double t, const Keyframe& k) { return t < k.t; });
  out.keyframes.insert(pos, kf);
  return out;
}

KeyValue sample_track(const Track& track, double t) {
  const auto& keys = track.keyframes;
  if (keys.empty()) fail(Errc::kEmptyTrack, "track has no keyframes: " + track.id);
  if (t <= keys.front().t) return keys.front().value;
  if (t >= keys.back().t) return keys.back().value;
  auto hi = std::upper_bound(keys.begin(), keys.end(), t,
                             [](double v, const Keyframe& k) { return v < k.t; });
  auto lo = hi - 1;
  double u = (t - lo->t) / (hi->t - lo->t);
  if (lo->easing == Easing::kEaseInOut) u = smoothstep(u);
  return interpolate(lo->value, hi->value, u);
}

std::optional<PathSample> sample_path(const MotionPath& path, double t) {
  if (path.samples.empty()) return std::nullopt;
  const auto& s = path.samples;
  if (t <= s.front().t) return s.front();
  if (t >= s.back().t) return s.back();
  auto hi = std::upper_bound(s.begin(), s.end(), t,
                             [](double v, const PathSample& p) { return v < p.t; });
  auto lo = hi - 1;
  const double u = (t - lo->t) / (hi->t - lo->t);
  PathSample out;
  out.t = t;
  out.translation = lerp(lo->translation, hi->translation, u);
  out.yaw = wrap_angle(lo->yaw + wrap_angle(hi->yaw - lo->yaw) * u);
  return out;
}

std::vector<PathSample> integrate_input(const std::vector<InputEvent>& events, double speed,
                                        const RecordOptions& options) {
  if (events.empty()) fail(Errc::kEmptyRecording, "no input events");
  if (!(speed > 0) || !std::isfinite(speed)) fail(Errc::kInvalidArgument, "speed must be > 0");
  for (std::size_t i = 0; i < events.size(); ++i) {
    key_direction(events[i].key);
    if (!std::isfinite(events[i].t)) fail(Errc::kInvalidArgument, "non-finite event time");
    if (i > 0 && events[i].t < events[i - 1].t) {
      fail(Errc::kInvalidArgument, "input events must be time-ordered");
    }
  }
  const double t_start = events.front().t;
  const double t_end = events.back().t;
  if (!(t_end > t_start)) fail(Errc::kEmptyRecording, "recording has zero duration");

  std::vector<double> times;
  const double dt = 1.0 / options.sample_hz;
  const auto ticks = static_cast<long>(std::floor((t_end - t_start) * options.sample_hz + 1e-9));
  for (long i = 0; i <= ticks; ++i) times.push_back(t_start + static_cast<double>(i) * dt);
  if (t_end - times.back() > kTimeEps) times.push_back(t_end);

  std::array<bool, 6> held{};
  auto velocity = [&]() {
    Vec3 dir;
    for (const char k : {'W', 'S', 'A', 'D', 'Q', 'E'}) {
      if (held[key_slot(k)]) dir += key_direction(k);
    }
    return length(dir) > 0 ? normalized(dir) * speed : Vec3{};
  };

  std::vector<PathSample> dense;
  dense.reserve(times.size());
  Vec3 pos = options.start;
  double cur_t = t_start;
  std::size_t next_event = 0;
  Vec3 facing{-std::sin(options.start_yaw), 0, -std::cos(options.start_yaw)};
  for (const double ts : times) {
    while (next_event < events.size() && events[next_event].t <= ts) {
      const InputEvent& e = events[next_event];
      pos += velocity() * (e.t - cur_t);
      cur_t = e.t;
      held[key_slot(e.key)] = e.down;
      ++next_event;
    }
    pos += velocity() * (ts - cur_t);
    cur_t = ts;
    if (!dense.empty()) {
      const Vec3 step = pos - dense.back().translation;
      const Vec3 horizontal{step.x, 0, step.z};
      if (length(horizontal) > 1e-12) {
        const double alpha = 1 - std::exp(-(ts - dense.back().t) / options.yaw_smoothing_s);
        const Vec3 target = normalized(horizontal);
        const Vec3 blended = facing + (target - facing) * alpha;
        facing = length(blended) > 1e-9 ? normalized(blended) : target;
      }
    }
    dense.push_back({ts, pos, std::atan2(-facing.x, -facing.z)});
  }
  return dense;
}

MotionPath record_motion_path(const std::vector<InputEvent>& events, double speed,
                              const RecordOptions& options) {
  std::vector<PathSample> dense = integrate_input(events, speed, options);
  const double duration = dense.back().t - dense.front().t;
  const auto budget =
      static_cast<std::size_t>(std::floor(duration * options.max_samples_per_second)) + 1;
  // Yaw fidelity is traded away first when the rate budget is exceeded; the
  // positional tolerance is never relaxed.
  std::vector<PathSample> kept = simplify(dense, options.tolerance_m, deg_to_rad(5.0));
  if (kept.size() > budget) kept = simplify(dense, options.tolerance_m, 0.0);
  MotionPath path;
  path.entity_id = options.entity_id;
  path.samples = std::move(kept);
  path.source = PathSource::kRecorded;
  if (path.samples.size() < 2) fail(Errc::kEmptyRecording, "recording too short");
  return path;
}

void validate_track(const Track& track, const scene::Scene& scene) {
  if (track.id.empty()) fail(Errc::kInvalidArgument, "empty track id");
  for (std::size_t i = 0; i < track.keyframes.size(); ++i) {
    if (!value_matches(track.channel, track.keyframes[i].value)) {
      fail(Errc::kTypeMismatch, "keyframe type mismatch on track " + track.id);
    }
    if (i > 0 && !(track.keyframes[i].t > track.keyframes[i - 1].t)) {
      fail(Errc::kInvalidArgument, "keyframe times not increasing on track " + track.id);
    }
  }
  switch (track.kind) {
    case TrackKind::kCamera:
      if (!scene.find_camera(track.target_id)) {
        fail(Errc::kUnknownId, "camera track targets unknown camera " + track.target_id);
      }
      if (track.channel != Channel::kTransform && track.channel != Channel::kFov) {
        fail(Errc::kTypeMismatch, "camera tracks animate transform or fov");
      }
      if (!track.paths.empty()) fail(Errc::kTypeMismatch, "camera tracks carry no motion paths");
      break;
    case TrackKind::kElementAnimation: {
      const auto* e = scene.find_entity(track.target_id);
      if (!e) fail(Errc::kUnknownId, "animation track targets unknown entity " + track.target_id);
      if (!e->movable) fail(Errc::kInvalidArgument, "entity is not movable: " + e->id);
      if (track.channel != Channel::kTransform) {
        fail(Errc::kTypeMismatch, "element-animation tracks animate transforms");
      }
      for (std::size_t i = 0; i < track.paths.size(); ++i) {
        const auto& p = track.paths[i];
        if (p.entity_id != track.target_id) {
          fail(Errc::kInvalidArgument, "motion path entity differs from track target");
        }
        if (p.samples.size() < 2) fail(Errc::kInvalidArgument, "motion path needs >= 2 samples");
        for (std::size_t k = 1; k < p.samples.size(); ++k) {
          if (!(p.samples[k].t > p.samples[k - 1].t)) {
            fail(Errc::kInvalidArgument, "motion path sample times not increasing");
          }
        }
        if (i > 0 && p.start() < track.paths[i - 1].end()) {
          fail(Errc::kInvalidArgument, "motion paths on a track must not overlap");
        }
      }
      break;
    }
    case TrackKind::kFixedElement: {
      const bool is_entity = scene.find_entity(track.target_id) != nullptr;
      const bool is_light = scene.find_light(track.target_id) != nullptr;
      if (!is_entity && !is_light) {
        fail(Errc::kUnknownId, "fixed-element track targets unknown id " + track.target_id);
      }
      const bool appearance = track.channel == Channel::kColor ||
                              (track.channel == Channel::kIntensity && is_light);
      if (!appearance || !track.paths.empty()) {
        fail(Errc::kTypeMismatch, "fixed-element tracks carry appearance keyframes only");
      }
      break;
    }
  }
}

void validate_clip(const Clip& clip, const scene::Scene& scene) {
  if (clip.id.empty()) fail(Errc::kInvalidArgument, "empty clip id");
  if (!scene.find_camera(clip.camera_id)) {
    fail(Errc::kUnknownId, "clip " + clip.id + " references unknown camera " + clip.camera_id);
  }
  if (!std::isfinite(clip.t_in) || !std::isfinite(clip.t_out) || clip.t_in < 0 ||
      !(clip.t_in < clip.t_out)) {
    fail(Errc::kInvalidArgument, "clip needs 0 <= t_in < t_out: " + clip.id);
  }
  if (!(clip.fps > 0) || !std::isfinite(clip.fps)) {
    fail(Errc::kInvalidArgument, "clip fps must be > 0: " + clip.id);
  }
  if (clip.t_out - clip.t_in > kMaxClipSeconds + kTimeEps) {
    fail(Errc::kClipTooLong, "clip longer than 5 s: " + clip.id);
  }
}

void validate_timeline(const Timeline& tl, const scene::Scene& scene) {
  if (tl.scene_id != scene.id) {
    fail(Errc::kUnknownId, "timeline " + tl.id + " references scene " + tl.scene_id);
  }
  std::vector<std::string> ids;
  for (const auto& t : tl.tracks) {
    validate_track(t, scene);
    ids.push_back(t.id);
  }
  for (const auto& c : tl.clips) {
    validate_clip(c, scene);
    check_clip_against(tl, c);
    ids.push_back(c.id);
  }
  std::sort(ids.begin(), ids.end());
  if (auto it = std::adjacent_find(ids.begin(), ids.end()); it != ids.end()) {
    fail(Errc::kDuplicateId, "duplicate id in timeline: " + *it);
  }
}

Timeline add_track(const Timeline& tl, const scene::Scene& scene, Track track) {
  check_unique_id(tl, track.id);
  validate_track(track, scene);
  Timeline out = tl;
  out.tracks.push_back(std::move(track));
  return out;
}

Timeline add_track_keyframe(const Timeline& tl, std::string_view track_id, const Keyframe& kf) {
  Timeline out = tl;
  Track* t = find_track_mut(out, track_id);
  *t = add_keyframe(*t, kf);
  return out;
}

Timeline add_motion_path(const Timeline& tl, std::string_view track_id, MotionPath path) {
  Timeline out = tl;
  Track* t = find_track_mut(out, track_id);
  if (t->kind != TrackKind::kElementAnimation) {
    fail(Errc::kTypeMismatch, "motion paths belong on element-animation tracks");
  }
  if (path.entity_id.empty()) path.entity_id = t->target_id;
  if (path.entity_id != t->target_id) {
    fail(Errc::kInvalidArgument, "motion path entity differs from track target");
  }
  if (path.samples.size() < 2) fail(Errc::kInvalidArgument, "motion path needs >= 2 samples");
  for (const auto& p : t->paths) {
    if (path.start() < p.end() && p.start() < path.end()) {
      fail(Errc::kInvalidArgument, "motion path overlaps an existing path");
    }
  }
  auto pos = std::upper_bound(t->paths.begin(), t->paths.end(), path.start(),
                              [](double s, const MotionPath& p) { return s < p.start(); });
  t->paths.insert(pos, std::move(path));
  return out;
}

Timeline add_clip(const Timeline& tl, const scene::Scene& scene, Clip clip) {
  check_unique_id(tl, clip.id);
  validate_clip(clip, scene);
  check_clip_against(tl, clip);
  Timeline out = tl;
  out.clips.push_back(std::move(clip));
  return out;
}

Timeline remove_clip(const Timeline& tl, std::string_view clip_id) {
  Timeline out = tl;
  auto it = std::find_if(out.clips.begin(), out.clips.end(),
                         [&](const Clip& c) { return c.id == clip_id; });
  if (it == out.clips.end()) fail(Errc::kUnknownId, "unknown clip: " + std::string(clip_id));
  out.clips.erase(it);
  return out;
}

Timeline replace_clip(const Timeline& tl, const scene::Scene& scene, const Clip& clip) {
  validate_clip(clip, scene);
  check_clip_against(tl, clip);
  Timeline out = tl;
  for (auto& c : out.clips) {
    if (c.id == clip.id) {
      c = clip;
      return out;
    }
  }
  fail(Errc::kUnknownId, "unknown clip: " + clip.id);
}

FrameState evaluate_at(const Timeline& tl, const scene::Scene& scene, const scene::Camera& camera,
                       double t) {
  FrameState fs;
  fs.t = t;
  fs.camera = camera;
  for (const auto& track : tl.tracks) {
    if (track.kind != TrackKind::kCamera || track.target_id != camera.id ||
        track.keyframes.empty()) {
      continue;
    }
    const KeyValue v = sample_track(track, t);
    if (const auto* tr = std::get_if<Transform>(&v)) {
      fs.camera.transform.translation = tr->translation;
      fs.camera.transform.rotation = tr->rotation;
    } else if (const auto* f = std::get_if<FovDeg>(&v)) {
      fs.camera.fov_deg = f->value;
    }
  }
  for (const auto& e : scene.entities) {
    EntityState es{e.id, e.transform, e.base_color};
    for (const auto& track : tl.tracks) {
      if (track.target_id != e.id) continue;
      if (track.kind == TrackKind::kElementAnimation) {
        if (!track.keyframes.empty()) es.transform = std::get<Transform>(sample_track(track, t));
        // The most recent path that has started wins; before any path starts
        // the keyframed/static transform stands.
        const MotionPath* active = nullptr;
        for (const auto& p : track.paths) {
          if (p.start() <= t + kTimeEps) active = &p;
        }
        if (active) {
          const auto s = sample_path(*active, t);
          es.transform.translation = s->translation;
          es.transform.rotation = Quat::from_yaw(s->yaw);
        }
      } else if (track.kind == TrackKind::kFixedElement && track.channel == Channel::kColor &&
                 !track.keyframes.empty()) {
        es.color = std::get<Rgb>(sample_track(track, t));
      }
    }
    fs.entities.push_back(std::move(es));
  }
  for (const auto& l : scene.lights) {
    LightState ls{l.id, l.color, l.intensity};
    for (const auto& track : tl.tracks) {
      if (track.target_id != l.id || track.kind != TrackKind::kFixedElement ||
          track.keyframes.empty()) {
        continue;
      }
      const KeyValue v = sample_track(track, t);
      if (const auto* c = std::get_if<Rgb>(&v)) ls.color = *c;
      if (const auto* in = std::get_if<Intensity>(&v)) ls.intensity = in->value;
    }
    fs.lights.push_back(std::move(ls));
  }
  return fs;
}

FramePlan compose_sequence(const Timeline& tl, const scene::Scene& scene, double t0, double t1,
                           double fps) {
  if (!(fps > 0) || !std::isfinite(fps)) fail(Errc::kInvalidArgument, "fps must be > 0");
  if (!std::isfinite(t0) || !std::isfinite(t1) || !(t0 < t1) || t0 < 0) {
    fail(Errc::kInvalidArgument, "compose range needs 0 <= t0 < t1");
  }
  if (tl.clips.empty()) fail(Errc::kCameraGap, "timeline has no clips");
  double extent_lo = tl.clips.front().t_in, extent_hi = tl.clips.front().t_out;
  for (const auto& c : tl.clips) {
    extent_lo = std::min(extent_lo, c.t_in);
    extent_hi = std::max(extent_hi, c.t_out);
  }
  if (t0 < extent_lo - kTimeEps || t1 > extent_hi + kTimeEps) {
    fail(Errc::kInvalidArgument, "compose range outside timeline extent");
  }

  std::vector<const Clip*> window;
  for (const auto& c : tl.clips) {
    if (c.t_in < t1 - kTimeEps && c.t_out > t0 + kTimeEps) window.push_back(&c);
  }
  std::sort(window.begin(), window.end(), [](const Clip* a, const Clip* b) {
    return a->t_in < b->t_in || (a->t_in == b->t_in && a->id < b->id);
  });
  double covered = t0;
  double prev_out = -1;
  const Clip* prev = nullptr;
  for (const Clip* c : window) {
    if (prev && c->t_in < prev_out - kTimeEps) {
      fail(Errc::kCameraOverlap, "clips " + prev->id + " and " + c->id + " overlap");
    }
    if (c->t_in > covered + kTimeEps) {
      fail(Errc::kCameraGap, "no active clip at t=" + text::format_double(covered));
    }
    covered = std::max(covered, c->t_out);
    if (c->t_out > prev_out) {
      prev_out = c->t_out;
      prev = c;
    }
  }
  if (covered < t1 - kTimeEps) {
    fail(Errc::kCameraGap, "no active clip at t=" + text::format_double(covered));
  }

  FramePlan plan;
  plan.t0 = t0;
  plan.t1 = t1;
  plan.fps = fps;
  const long n = std::lround((t1 - t0) * fps);
  for (long k = 0; k < n; ++k) {
    const double t = t0 + static_cast<double>(k) / fps;
    const Clip* active = nullptr;
    for (const Clip* c : window) {
      if (c->t_in <= t + kTimeEps && t < c->t_out - kTimeEps) active = c;
    }
    if (!active) fail(Errc::kCameraGap, "no active clip at t=" + text::format_double(t));
    FrameState fs = evaluate_at(tl, scene, *scene.find_camera(active->camera_id), t);
    fs.index = static_cast<int>(k);
    fs.clip_id = active->id;
    plan.frames.push_back(std::move(fs));
  }
  return plan;
}

std::string frame_plan_table(const FramePlan& plan) {
  std::ostringstream out;
  char buf[256];
  out << "# frame\tt\tclip\tcamera\tcam_x\tcam_y\tcam_z\tfov_deg";
  if (!plan.frames.empty()) {
    for (const auto& e : plan.frames.front().entities) out << '\t' << e.id << "_xyz";
  }
  out << '\n';
  for (const auto& f : plan.frames) {
    const Vec3& c = f.camera.transform.translation;
    std::snprintf(buf, sizeof(buf), "%d\t%.4f\t%s\t%s\t%.4f\t%.4f\t%.4f\t%.3f", f.index, f.t,
                  f.clip_id.c_str(), f.camera.id.c_str(), c.x, c.y, c.z, f.camera.fov_deg);
    out << buf;
    for (const auto& e : f.entities) {
      const Vec3& p = e.transform.translation;
      std::snprintf(buf, sizeof(buf), "\t%.4f,%.4f,%.4f", p.x, p.y, p.z);
      out << buf;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace previz::timeline
