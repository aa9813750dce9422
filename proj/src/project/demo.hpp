// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

// The "hacker scene" walkthrough: a dim room with a glowing computer, a
// hacker at the desk and a conspirator who walks in. Built entirely in code.

#pragma once

#include "project/project.hpp"

namespace previz::project {

namespace demo {
inline constexpr std::string_view kProjectId = "hacker-scene";
inline constexpr std::string_view kSceneId = "room";
inline constexpr std::string_view kTimelineId = "main";
inline constexpr std::string_view kHacker = "hacker";
inline constexpr std::string_view kConspirator = "conspirator";
inline constexpr std::string_view kCamOts = "cam_ots";
inline constexpr std::string_view kCamTwo = "cam_two";
inline constexpr std::string_view kClipOts = "c1";
inline constexpr std::string_view kClipTwo = "c2";
inline constexpr std::string_view kSkeletonId = "discussion";
inline constexpr std::uint64_t kSeed = 1206;
}  // namespace demo

// Scene, timeline (recorded walk, camera keyframes, two clips) and a remixed
// two-person skeleton entry whose documents are written to `store`.
Project build_demo(AssetStore& store);

// Prompt fields used by the scripted walkthrough.
style::PromptFields demo_prompt_fields();

// Two people in conversation, 16 fps, in unit-square image coordinates.
skeleton::SkeletonSequence demo_discussion(int frames = 48);

}  // namespace previz::project
