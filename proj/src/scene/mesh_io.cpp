// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

#include "scene/mesh_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include "common/error.hpp"
#include "common/text.hpp"

namespace previz::scene {
namespace {

constexpr char kBinaryMagic[8] = {'P', 'V', 'Z', 'M', 'E', 'S', 'H', '1'};
constexpr std::string_view kTextHeader = "previz-mesh/1";

static_assert(std::endian::native == std::endian::little,
              "binary mesh codec assumes a little-endian host");

double need_number(const std::string& tok, std::size_t line_no) {
  auto v = text::parse_double(tok);
  if (!v || !std::isfinite(*v)) {
    fail(Errc::kInvalidGeometry, "bad number '" + tok + "' on line " + std::to_string(line_no));
  }
  return *v;
}

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T read() {
    if (offset_ + sizeof(T) > bytes_.size()) fail(Errc::kInvalidGeometry, "truncated mesh");
    T v;
    std::memcpy(&v, bytes_.data() + offset_, sizeof(T));
    offset_ += sizeof(T);
    return v;
  }

  std::size_t remaining() const { return bytes_.size() - offset_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t offset_ = 0;
};

template <typename T>
void append(std::vector<std::uint8_t>& out, T v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

}  // namespace

MeshGeometry parse_mesh_text(std::string_view text) {
  std::vector<std::vector<std::string>> lines;
  std::vector<std::size_t> line_numbers;
  std::size_t n = 0;
  for (std::string_view raw : text::split_lines(text)) {
    ++n;
    std::string_view line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    lines.push_back(text::tokenize(line));
    line_numbers.push_back(n);
  }
  std::size_t i = 0;
  if (lines.empty() || lines[0].size() != 1 || lines[0][0] != kTextHeader) {
    fail(Errc::kInvalidGeometry, "missing previz-mesh/1 header");
  }
  ++i;
  if (i >= lines.size() || lines[i].empty() || lines[i][0] != "vertices" ||
      lines[i].size() < 2 || lines[i].size() > 3) {
    fail(Errc::kInvalidGeometry, "expected 'vertices <count> [colors]'");
  }
  auto vcount = text::parse_int(lines[i][1]);
  const bool has_colors = lines[i].size() == 3;
  if (!vcount || *vcount < 0 || (has_colors && lines[i][2] != "colors")) {
    fail(Errc::kInvalidGeometry, "bad vertices line");
  }
  ++i;
  MeshGeometry mesh;
  for (long long v = 0; v < *vcount; ++v, ++i) {
    const std::size_t want = has_colors ? 6 : 3;
    if (i >= lines.size() || lines[i].size() != want) {
      fail(Errc::kInvalidGeometry, "vertex record " + std::to_string(v) + " malformed");
    }
    const auto& t = lines[i];
    mesh.positions.push_back({need_number(t[0], line_numbers[i]),
                              need_number(t[1], line_numbers[i]),
                              need_number(t[2], line_numbers[i])});
    if (has_colors) {
      mesh.colors.push_back({need_number(t[3], line_numbers[i]),
                             need_number(t[4], line_numbers[i]),
                             need_number(t[5], line_numbers[i])});
    }
  }
  if (i >= lines.size() || lines[i].size() != 2 || lines[i][0] != "triangles") {
    fail(Errc::kInvalidGeometry, "expected 'triangles <count>'");
  }
  auto tcount = text::parse_int(lines[i][1]);
  if (!tcount || *tcount < 0) fail(Errc::kInvalidGeometry, "bad triangles line");
  ++i;
  for (long long t = 0; t < *tcount; ++t, ++i) {
    if (i >= lines.size() || lines[i].size() != 3) {
      fail(Errc::kInvalidGeometry, "triangle record " + std::to_string(t) + " malformed");
    }
    std::array<std::uint32_t, 3> tri{};
    for (int k = 0; k < 3; ++k) {
      auto idx = text::parse_int(lines[i][k]);
      if (!idx || *idx < 0 || *idx > 0xffffffffLL) fail(Errc::kInvalidGeometry, "bad index");
      tri[k] = static_cast<std::uint32_t>(*idx);
    }
    mesh.triangles.push_back(tri);
  }
  if (i != lines.size()) fail(Errc::kInvalidGeometry, "trailing data after triangles");
  validate_geometry(mesh);
  return mesh;
}

MeshGeometry parse_mesh_binary(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < sizeof(kBinaryMagic) ||
      std::memcmp(bytes.data(), kBinaryMagic, sizeof(kBinaryMagic)) != 0) {
    fail(Errc::kInvalidGeometry, "bad binary mesh magic");
  }
  ByteReader in(bytes.subspan(sizeof(kBinaryMagic)));
  const auto vcount = in.read<std::uint32_t>();
  const auto tcount = in.read<std::uint32_t>();
  const auto flags = in.read<std::uint32_t>();
  if (flags & ~1u) fail(Errc::kInvalidGeometry, "unknown mesh flags");
  const bool has_colors = flags & 1u;
  const std::size_t need = std::size_t{vcount} * 12 + (has_colors ? std::size_t{vcount} * 3 : 0) +
                           std::size_t{tcount} * 12;
  if (in.remaining() != need) fail(Errc::kInvalidGeometry, "binary mesh size mismatch");
  MeshGeometry mesh;
  mesh.positions.reserve(vcount);
  for (std::uint32_t v = 0; v < vcount; ++v) {
    const float x = in.read<float>(), y = in.read<float>(), z = in.read<float>();
    mesh.positions.push_back({x, y, z});
  }
  if (has_colors) {
    for (std::uint32_t v = 0; v < vcount; ++v) {
      const auto r = in.read<std::uint8_t>(), g = in.read<std::uint8_t>(),
                 b = in.read<std::uint8_t>();
      mesh.colors.push_back({r / 255.0, g / 255.0, b / 255.0});
    }
  }
  for (std::uint32_t t = 0; t < tcount; ++t) {
    mesh.triangles.push_back(
        {in.read<std::uint32_t>(), in.read<std::uint32_t>(), in.read<std::uint32_t>()});
  }
  validate_geometry(mesh);
  return mesh;
}

MeshGeometry parse_mesh(std::span<const std::uint8_t> bytes) {
  if (bytes.size() >= sizeof(kBinaryMagic) &&
      std::memcmp(bytes.data(), kBinaryMagic, sizeof(kBinaryMagic)) == 0) {
    return parse_mesh_binary(bytes);
  }
  return parse_mesh_text(
      std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

MeshGeometry load_mesh_file(const std::string& path) {
  const std::string data = text::read_file(path);
  return parse_mesh(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(data.data()), data.size()));
}

std::string write_mesh_text(const MeshGeometry& mesh) {
  std::string out(kTextHeader);
  out += "\nvertices " + std::to_string(mesh.positions.size());
  if (!mesh.colors.empty()) out += " colors";
  out += '\n';
  for (std::size_t i = 0; i < mesh.positions.size(); ++i) {
    const Vec3& p = mesh.positions[i];
    out += text::format_double(p.x) + ' ' + text::format_double(p.y) + ' ' +
           text::format_double(p.z);
    if (!mesh.colors.empty()) {
      const Rgb& c = mesh.colors[i];
      out += ' ' + text::format_double(c.r) + ' ' + text::format_double(c.g) + ' ' +
             text::format_double(c.b);
    }
    out += '\n';
  }
  out += "triangles " + std::to_string(mesh.triangles.size()) + '\n';
  for (const auto& t : mesh.triangles) {
    out += std::to_string(t[0]) + ' ' + std::to_string(t[1]) + ' ' + std::to_string(t[2]) + '\n';
  }
  return out;
}

std::vector<std::uint8_t> write_mesh_binary(const MeshGeometry& mesh) {
  std::vector<std::uint8_t> out(kBinaryMagic, kBinaryMagic + sizeof(kBinaryMagic));
  append(out, static_cast<std::uint32_t>(mesh.positions.size()));
  append(out, static_cast<std::uint32_t>(mesh.triangles.size()));
  append(out, static_cast<std::uint32_t>(mesh.colors.empty() ? 0 : 1));
  for (const Vec3& p : mesh.positions) {
    append(out, static_cast<float>(p.x));
    append(out, static_cast<float>(p.y));
    append(out, static_cast<float>(p.z));
  }
  for (const Rgb& c : mesh.colors) {
    append(out, static_cast<std::uint8_t>(std::lround(c.r * 255)));
    append(out, static_cast<std::uint8_t>(std::lround(c.g * 255)));
    append(out, static_cast<std::uint8_t>(std::lround(c.b * 255)));
  }
  for (const auto& t : mesh.triangles) {
    for (std::uint32_t i : t) append(out, i);
  }
  return out;
}

}  // namespace previz::scene
