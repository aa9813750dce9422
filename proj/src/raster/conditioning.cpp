// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <limits>

#include "common/error.hpp"
#include "raster/raster.hpp"

namespace previz::raster {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Squared distance transform of a sampled function along one line
// (Felzenszwalb & Huttenlocher lower envelope of parabolas).
void distance_transform_1d(const std::vector<double>& f, std::vector<double>& d,
                           std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    double s;
    while (true) {
      const int p = v[k];
      s = ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * q - 2.0 * p);
      if (s <= z[k] && k > 0) {
        --k;
      } else {
        break;
      }
    }
    if (s <= z[k]) {
      // k == 0 and the new parabola dominates everywhere
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  if (k < 0) {
    std::fill(d.begin(), d.end(), kInf);
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    const double dq = q - v[j];
    d[q] = dq * dq + f[v[j]];
  }
}

std::vector<double> squared_distance_to_set(const GrayImage& binary) {
  const int w = binary.width, h = binary.height;
  std::vector<double> grid(binary.pixel_count());
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = binary.data[i] ? 0.0 : kInf;
  const int n = std::max(w, h);
  std::vector<double> f(n), d(n), z(n + 1);
  std::vector<int> v(n);
  f.resize(h);
  d.resize(h);
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) f[y] = grid[static_cast<std::size_t>(y) * w + x];
    distance_transform_1d(f, d, v, z);
    for (int y = 0; y < h; ++y) grid[static_cast<std::size_t>(y) * w + x] = d[y];
  }
  f.resize(w);
  d.resize(w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) f[x] = grid[static_cast<std::size_t>(y) * w + x];
    distance_transform_1d(f, d, v, z);
    for (int x = 0; x < w; ++x) grid[static_cast<std::size_t>(y) * w + x] = d[x];
  }
  return grid;
}

// Alpha-over into a floating-point canvas.
void blend(std::vector<double>& canvas, int width, int x, int y, const body::Rgb8& color,
           double coverage) {
  const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
  canvas[i] += (color.r - canvas[i]) * coverage;
  canvas[i + 1] += (color.g - canvas[i + 1]) * coverage;
  canvas[i + 2] += (color.b - canvas[i + 2]) * coverage;
}

void draw_segment(std::vector<double>& canvas, int width, int height, double ax, double ay,
                  double bx, double by, double half_width, const body::Rgb8& color) {
  const double reach = half_width + 1.0;
  const int x0 = std::max(0, static_cast<int>(std::floor(std::min(ax, bx) - reach)));
  const int x1 = std::min(width - 1, static_cast<int>(std::ceil(std::max(ax, bx) + reach)));
  const int y0 = std::max(0, static_cast<int>(std::floor(std::min(ay, by) - reach)));
  const int y1 = std::min(height - 1, static_cast<int>(std::ceil(std::max(ay, by) + reach)));
  const double dx = bx - ax, dy = by - ay;
  const double len2 = dx * dx + dy * dy;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double px = x + 0.5, py = y + 0.5;
      double u = len2 > 0 ? ((px - ax) * dx + (py - ay) * dy) / len2 : 0.0;
      u = std::clamp(u, 0.0, 1.0);
      const double qx = ax + u * dx - px, qy = ay + u * dy - py;
      const double dist = std::sqrt(qx * qx + qy * qy);
      const double coverage = std::clamp(half_width + 0.5 - dist, 0.0, 1.0);
      if (coverage > 0) blend(canvas, width, x, y, color, coverage);
    }
  }
}

}  // namespace

GrayImage dilate_disc(const GrayImage& binary, double radius_px) {
  GrayImage out(binary.width, binary.height, 0);
  if (radius_px <= 0) {
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = binary.data[i] ? 255 : 0;
    return out;
  }
  const std::vector<double> d2 = squared_distance_to_set(binary);
  const double r2 = radius_px * radius_px;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = d2[i] <= r2 ? 255 : 0;
  return out;
}

GrayImage gaussian_blur(const GrayImage& image, double sigma) {
  if (sigma <= 0) return image;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  double sum = 0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-(double(i) * i) / (2 * sigma * sigma));
    sum += kernel[i + radius];
  }
  for (double& k : kernel) k /= sum;
  const int w = image.width, h = image.height;
  std::vector<double> tmp(image.pixel_count());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0;
      for (int i = -radius; i <= radius; ++i) {
        const int sx = std::clamp(x + i, 0, w - 1);
        acc += kernel[i + radius] * image.data[static_cast<std::size_t>(y) * w + sx];
      }
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  GrayImage out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0;
      for (int i = -radius; i <= radius; ++i) {
        const int sy = std::clamp(y + i, 0, h - 1);
        acc += kernel[i + radius] * tmp[static_cast<std::size_t>(sy) * w + x];
      }
      out.data[static_cast<std::size_t>(y) * w + x] =
          static_cast<std::uint8_t>(std::lround(std::clamp(acc, 0.0, 255.0)));
    }
  }
  return out;
}

std::vector<std::uint16_t> character_ids(const ConditioningFrame& frame) {
  std::vector<std::uint16_t> out;
  for (const auto& e : frame.legend) {
    if (e.is_character) out.push_back(e.raster_id);
  }
  return out;
}

MaskSet masks_from_ids(const ConditioningFrame& frame, std::span<const std::uint16_t> ids,
                       double expand_px, double blur_sigma) {
  if (!(expand_px >= 0 && expand_px <= 64)) {
    fail(Errc::kInvalidArgument, "expand_px must be in [0, 64]");
  }
  if (!(blur_sigma >= 0 && blur_sigma <= 16)) {
    fail(Errc::kInvalidArgument, "blur_sigma must be in [0, 16]");
  }
  MaskSet set;
  set.background = GrayImage(frame.width, frame.height, 255);
  for (const std::uint16_t rid : ids) {
    const LegendEntry* entry = frame.find(rid);
    if (rid == 0 || entry == nullptr) {
      fail(Errc::kUnknownCharacterId, "no entity with raster id " + std::to_string(rid));
    }
    GrayImage binary(frame.width, frame.height, 0);
    for (std::size_t i = 0; i < binary.data.size(); ++i) {
      binary.data[i] = frame.id.data[i] == rid ? 255 : 0;
    }
    GrayImage alpha = gaussian_blur(dilate_disc(binary, expand_px), blur_sigma);
    for (std::size_t i = 0; i < alpha.data.size(); ++i) {
      set.background.data[i] =
          std::min<std::uint8_t>(set.background.data[i], static_cast<std::uint8_t>(255 - alpha.data[i]));
    }
    set.characters.push_back({rid, entry->character, std::move(alpha)});
  }
  for (std::size_t i = 0; i < set.background.data.size(); ++i) {
    int max_alpha = 0;
    for (const auto& c : set.characters) max_alpha = std::max<int>(max_alpha, c.alpha.data[i]);
    if (set.background.data[i] != 255 - max_alpha) {
      fail(Errc::kInternal, "background mask inversion identity violated");
    }
  }
  return set;
}

GrayImage outline_from_ids(const Gray16Image& ids) {
  GrayImage out(ids.width, ids.height, 0);
  for (int y = 0; y < ids.height; ++y) {
    for (int x = 0; x < ids.width; ++x) {
      const std::uint16_t v = *ids.at(x, y);
      const bool edge = (x > 0 && *ids.at(x - 1, y) != v) ||
                        (x + 1 < ids.width && *ids.at(x + 1, y) != v) ||
                        (y > 0 && *ids.at(x, y - 1) != v) ||
                        (y + 1 < ids.height && *ids.at(x, y + 1) != v);
      if (edge) *out.at(x, y) = 255;
    }
  }
  return out;
}

RgbImage render_pose_overlay(std::span<const skeleton::PersonPose> persons, RenderSize size) {
  if (size.width < 1 || size.height < 1) fail(Errc::kInvalidArgument, "empty overlay size");
  std::vector<double> canvas(static_cast<std::size_t>(size.width) * size.height * 3, 0.0);
  const double half_width = std::max(1.0, std::min(size.width, size.height) / 160.0);
  const double joint_radius = half_width * 1.5;

  std::vector<const skeleton::PersonPose*> ordered;
  for (const auto& p : persons) ordered.push_back(&p);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto* a, const auto* b) { return a->person_id < b->person_id; });

  for (const auto* person : ordered) {
    auto visible = [&](int j) {
      return person->joints[j].confidence >= kPoseConfidenceThreshold;
    };
    auto px = [&](int j) { return person->joints[j].x * size.width; };
    auto py = [&](int j) { return person->joints[j].y * size.height; };
    for (int l = 0; l < body::kLimbCount; ++l) {
      const auto& limb = body::kLimbs[l];
      if (!visible(limb.a) || !visible(limb.b)) continue;
      draw_segment(canvas, size.width, size.height, px(limb.a), py(limb.a), px(limb.b),
                   py(limb.b), half_width, body::kPalette[l]);
    }
    for (int j = 0; j < body::kJointCount; ++j) {
      if (!visible(j)) continue;
      draw_segment(canvas, size.width, size.height, px(j), py(j), px(j), py(j), joint_radius,
                   body::kPalette[j]);
    }
  }
  RgbImage out(size.width, size.height);
  for (std::size_t i = 0; i < canvas.size(); ++i) {
    out.data[i] = static_cast<std::uint8_t>(std::lround(std::clamp(canvas[i], 0.0, 255.0)));
  }
  return out;
}

skeleton::PersonPose project_rig(const scene::SceneEntity& entity, const Transform& entity_pose,
                                 const scene::Camera& camera, RenderSize size) {
  if (!entity.rig) fail(Errc::kNoRig, "entity has no rig: " + entity.id);
  skeleton::PersonPose pose;
  pose.person_id = entity.raster_id;
  const scene::Viewport vp{size.width, size.height};
  for (int j = 0; j < body::kJointCount; ++j) {
    const Vec3 world = entity_pose.apply(entity.rig->joints[j]);
    const auto p = scene::project_point(camera, world, vp);
    if (p) pose.joints[j] = {p->x / size.width, p->y / size.height, 1.0};
  }
  return pose;
}

std::vector<skeleton::PersonPose> project_rigs(const scene::Scene& scene,
                                               const timeline::FrameState& state,
                                               RenderSize size) {
  std::vector<skeleton::PersonPose> out;
  for (const auto& e : scene.entities) {
    if (!e.rig) continue;
    Transform pose = e.transform;
    for (const auto& es : state.entities) {
      if (es.id == e.id) pose = es.transform;
    }
    out.push_back(project_rig(e, pose, state.camera, size));
  }
  return out;
}

}  // namespace previz::raster
