// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scene/scene.hpp"

namespace previz::scene {

// Triangle-soup interchange ("previz-mesh/1"), text or little-endian binary.
// See docs/formats.md for the byte layout.
MeshGeometry parse_mesh_text(std::string_view text);
MeshGeometry parse_mesh_binary(std::span<const std::uint8_t> bytes);
// Dispatches on the binary magic.
MeshGeometry parse_mesh(std::span<const std::uint8_t> bytes);
MeshGeometry load_mesh_file(const std::string& path);

std::string write_mesh_text(const MeshGeometry& mesh);
std::vector<std::uint8_t> write_mesh_binary(const MeshGeometry& mesh);

}  // namespace previz::scene
