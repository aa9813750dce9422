// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

#include <png.h>

#include <csetjmp>
#include <cstdlib>
#include <cstring>
#include <string>

#include "common/image.hpp"

namespace previz {
namespace {

struct WriteSink {
  std::vector<std::uint8_t>* out;
};

void write_callback(png_structp png, png_bytep data, png_size_t length) {
  auto* sink = static_cast<WriteSink*>(png_get_io_ptr(png));
  sink->out->insert(sink->out->end(), data, data + length);
}

void flush_callback(png_structp) {}

// libpng is C; errors leave through longjmp and are rethrown after setjmp.
thread_local std::string g_png_message;

[[noreturn]] void png_error_callback(png_structp png, png_const_charp message) {
  g_png_message = message;
  png_longjmp(png, 1);
}

void png_warning_callback(png_structp, png_const_charp) {}

std::vector<std::uint8_t> encode_rows(int width, int height, int color_type, int bit_depth,
                                      const std::uint8_t* rows, std::size_t row_bytes) {
  if (width <= 0 || height <= 0) fail(Errc::kInvalidArgument, "cannot encode empty image");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            png_error_callback, png_warning_callback);
  if (png == nullptr) fail(Errc::kInternal, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  std::vector<std::uint8_t> out;
  WriteSink sink{&out};
  std::vector<std::uint8_t> row(row_bytes);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(Errc::kInternal, "png encode: " + g_png_message);
  }
  {
    png_set_write_fn(png, &sink, write_callback, flush_callback);
    png_set_compression_level(png, 6);
    png_set_filter(png, PNG_FILTER_TYPE_BASE, PNG_FILTER_NONE);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
                 bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    // PNG stores 16-bit samples big-endian; rows arrive in host order.
    for (int y = 0; y < height; ++y) {
      const std::uint8_t* src = rows + static_cast<std::size_t>(y) * row_bytes;
      if (bit_depth == 16) {
        for (std::size_t i = 0; i + 1 < row_bytes; i += 2) {
          std::uint16_t v;
          std::memcpy(&v, src + i, 2);
          row[i] = static_cast<std::uint8_t>(v >> 8);
          row[i + 1] = static_cast<std::uint8_t>(v & 0xff);
        }
      } else {
        std::memcpy(row.data(), src, row_bytes);
      }
      png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
  }
  png_destroy_write_struct(&png, &info);
  return out;
}

struct ReadSource {
  std::span<const std::uint8_t> bytes;
  std::size_t offset = 0;
};

void read_callback(png_structp png, png_bytep data, png_size_t length) {
  auto* src = static_cast<ReadSource*>(png_get_io_ptr(png));
  if (src->offset + length > src->bytes.size()) {
    png_error(png, "truncated stream");
  }
  std::memcpy(data, src->bytes.data() + src->offset, length);
  src->offset += length;
}

struct Decoded {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 0;
  std::vector<std::uint8_t> bytes;  // 16-bit samples in host order
};

Decoded decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    fail(Errc::kCorruptFile, "not a PNG stream");
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                           png_error_callback, png_warning_callback);
  if (png == nullptr) fail(Errc::kInternal, "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  ReadSource source{bytes, 0};
  Decoded out;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(Errc::kCorruptFile, "png decode: " + g_png_message);
  }
  {
    png_set_read_fn(png, &source, read_callback);
    png_read_info(png, info);
    const int color_type = png_get_color_type(png, info);
    out.bit_depth = png_get_bit_depth(png, info);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && out.bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);
    out.width = static_cast<int>(png_get_image_width(png, info));
    out.height = static_cast<int>(png_get_image_height(png, info));
    out.channels = png_get_channels(png, info);
    out.bit_depth = png_get_bit_depth(png, info);
    const std::size_t row_bytes = png_get_rowbytes(png, info);
    if (out.width <= 0 || out.height <= 0 || out.width > 16384 || out.height > 16384) {
      png_error(png, "unsupported dimensions");
    }
    out.bytes.resize(row_bytes * static_cast<std::size_t>(out.height));
    for (int y = 0; y < out.height; ++y) {
      png_read_row(png, out.bytes.data() + static_cast<std::size_t>(y) * row_bytes, nullptr);
    }
    if (out.bit_depth == 16) {
      for (std::size_t i = 0; i + 1 < out.bytes.size(); i += 2) {
        const std::uint16_t v =
            static_cast<std::uint16_t>((out.bytes[i] << 8) | out.bytes[i + 1]);
        std::memcpy(out.bytes.data() + i, &v, 2);
      }
    }
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

}  // namespace

std::vector<std::uint8_t> encode_png(const RgbImage& image) {
  return encode_rows(image.width, image.height, PNG_COLOR_TYPE_RGB, 8, image.data.data(),
                     static_cast<std::size_t>(image.width) * 3);
}

std::vector<std::uint8_t> encode_png(const GrayImage& image) {
  return encode_rows(image.width, image.height, PNG_COLOR_TYPE_GRAY, 8, image.data.data(),
                     static_cast<std::size_t>(image.width));
}

std::vector<std::uint8_t> encode_png(const Gray16Image& image) {
  return encode_rows(image.width, image.height, PNG_COLOR_TYPE_GRAY, 16,
                     reinterpret_cast<const std::uint8_t*>(image.data.data()),
                     static_cast<std::size_t>(image.width) * 2);
}

RgbImage decode_png_rgb(std::span<const std::uint8_t> bytes) {
  Decoded d = decode(bytes);
  if (d.bit_depth != 8) fail(Errc::kCorruptFile, "expected 8-bit PNG");
  RgbImage img(d.width, d.height);
  if (d.channels == 3) {
    img.data = std::move(d.bytes);
  } else if (d.channels == 1) {
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
      img.data[i * 3] = img.data[i * 3 + 1] = img.data[i * 3 + 2] = d.bytes[i];
    }
  } else {
    fail(Errc::kCorruptFile, "unsupported PNG channel count");
  }
  return img;
}

GrayImage decode_png_gray(std::span<const std::uint8_t> bytes) {
  Decoded d = decode(bytes);
  if (d.bit_depth != 8 || d.channels != 1) fail(Errc::kCorruptFile, "expected 8-bit gray PNG");
  GrayImage img(d.width, d.height);
  img.data = std::move(d.bytes);
  return img;
}

Gray16Image decode_png_gray16(std::span<const std::uint8_t> bytes) {
  Decoded d = decode(bytes);
  if (d.bit_depth != 16 || d.channels != 1) fail(Errc::kCorruptFile, "expected 16-bit gray PNG");
  Gray16Image img(d.width, d.height);
  std::memcpy(img.data.data(), d.bytes.data(), d.bytes.size());
  return img;
}

double mean_abs_difference(const RgbImage& a, const RgbImage& b) {
  if (!a.same_size(b.width, b.height)) fail(Errc::kInvalidArgument, "image size mismatch");
  if (a.data.empty()) return 0.0;
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    total += static_cast<std::uint64_t>(std::abs(int(a.data[i]) - int(b.data[i])));
  }
  return static_cast<double>(total) / static_cast<double>(a.data.size());
}

RgbImage resize_nearest(const RgbImage& src, int width, int height) {
  RgbImage out(width, height);
  if (src.width == 0 || src.height == 0) return out;
  for (int y = 0; y < height; ++y) {
    const int sy = static_cast<int>((static_cast<std::int64_t>(y) * src.height) / height);
    for (int x = 0; x < width; ++x) {
      const int sx = static_cast<int>((static_cast<std::int64_t>(x) * src.width) / width);
      std::memcpy(out.at(x, y), src.at(sx, sy), 3);
    }
  }
  return out;
}

}  // namespace previz
