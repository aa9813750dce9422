// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "common/body.hpp"

namespace previz::skeleton {

// Normalized image coordinates: (0,0) top-left, (1,1) bottom-right.
struct Keypoint {
  double x = 0;
  double y = 0;
  double confidence = 0;

  friend bool operator==(const Keypoint&, const Keypoint&) = default;
};

struct PersonPose {
  std::int64_t person_id = -1;  // -1 when the source carried no identity
  std::array<Keypoint, body::kJointCount> joints{};

  friend bool operator==(const PersonPose&, const PersonPose&) = default;
};

struct SkeletonFrame {
  std::vector<PersonPose> persons;

  friend bool operator==(const SkeletonFrame&, const SkeletonFrame&) = default;
};

}  // namespace previz::skeleton
