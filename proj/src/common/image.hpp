// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "common/error.hpp"

namespace previz {

// Interleaved, row-major pixel buffer with a compile-time channel count.
template <typename T, int Channels>
struct Image {
  static constexpr int kChannels = Channels;
  using value_type = T;

  int width = 0;
  int height = 0;
  std::vector<T> data;

  Image() = default;
  Image(int w, int h, T fill = T{})
      : width(w), height(h),
        data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * Channels, fill) {
    if (w < 0 || h < 0) fail(Errc::kInvalidArgument, "negative image size");
  }

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  std::size_t index(int x, int y) const {
    return (static_cast<std::size_t>(y) * width + x) * Channels;
  }
  T* at(int x, int y) { return data.data() + index(x, y); }
  const T* at(int x, int y) const { return data.data() + index(x, y); }
  bool same_size(int w, int h) const { return width == w && height == h; }

  friend bool operator==(const Image&, const Image&) = default;
};

using RgbImage = Image<std::uint8_t, 3>;
using GrayImage = Image<std::uint8_t, 1>;
using Gray16Image = Image<std::uint16_t, 1>;

// PNG codecs. Encoding is byte-deterministic for a given libpng/zlib build.
std::vector<std::uint8_t> encode_png(const RgbImage& image);
std::vector<std::uint8_t> encode_png(const GrayImage& image);
std::vector<std::uint8_t> encode_png(const Gray16Image& image);

RgbImage decode_png_rgb(std::span<const std::uint8_t> bytes);
GrayImage decode_png_gray(std::span<const std::uint8_t> bytes);
Gray16Image decode_png_gray16(std::span<const std::uint8_t> bytes);

// Mean absolute per-channel difference, in 8-bit intensity units.
double mean_abs_difference(const RgbImage& a, const RgbImage& b);

RgbImage resize_nearest(const RgbImage& src, int width, int height);

}  // namespace previz
