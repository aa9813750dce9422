// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace previz::body {

// 18-joint body topology used for pose conditioning.
inline constexpr int kJointCount = 18;

enum Joint : int {
  kNose = 0,
  kNeck = 1,
  kRightShoulder = 2,
  kRightElbow = 3,
  kRightWrist = 4,
  kLeftShoulder = 5,
  kLeftElbow = 6,
  kLeftWrist = 7,
  kRightHip = 8,
  kRightKnee = 9,
  kRightAnkle = 10,
  kLeftHip = 11,
  kLeftKnee = 12,
  kLeftAnkle = 13,
  kRightEye = 14,
  kLeftEye = 15,
  kRightEar = 16,
  kLeftEar = 17,
};

inline constexpr std::array<std::string_view, kJointCount> kJointNames = {
    "nose",      "neck",      "r_shoulder", "r_elbow", "r_wrist", "l_shoulder",
    "l_elbow",   "l_wrist",   "r_hip",      "r_knee",  "r_ankle", "l_hip",
    "l_knee",    "l_ankle",   "r_eye",      "l_eye",   "r_ear",   "l_ear"};

struct Limb {
  int a;
  int b;
};

inline constexpr int kLimbCount = 17;

inline constexpr std::array<Limb, kLimbCount> kLimbs = {{
    {kNeck, kRightShoulder}, {kNeck, kLeftShoulder},   {kRightShoulder, kRightElbow},
    {kRightElbow, kRightWrist}, {kLeftShoulder, kLeftElbow}, {kLeftElbow, kLeftWrist},
    {kNeck, kRightHip},      {kRightHip, kRightKnee},  {kRightKnee, kRightAnkle},
    {kNeck, kLeftHip},       {kLeftHip, kLeftKnee},    {kLeftKnee, kLeftAnkle},
    {kNeck, kNose},          {kNose, kRightEye},       {kRightEye, kRightEar},
    {kNose, kLeftEye},       {kLeftEye, kLeftEar},
}};

struct Rgb8 {
  std::uint8_t r, g, b;
};

// One color per limb, in kLimbs order; joints reuse the color of their index.
inline constexpr std::array<Rgb8, kJointCount> kPalette = {{
    {255, 0, 0},   {255, 85, 0},  {255, 170, 0}, {255, 255, 0}, {170, 255, 0}, {85, 255, 0},
    {0, 255, 0},   {0, 255, 85},  {0, 255, 170}, {0, 255, 255}, {0, 170, 255}, {0, 85, 255},
    {0, 0, 255},   {85, 0, 255},  {170, 0, 255}, {255, 0, 255}, {255, 0, 170}, {255, 0, 85},
}};

}  // namespace previz::body
