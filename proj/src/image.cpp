// Copyright 2026 The rootnet Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rootnet/image.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <memory>

namespace rootnet {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

File open_file(const std::filesystem::path& path, const char* mode) {
  File f(std::fopen(path.c_str(), mode));
  if (!f) {
    throw IoError(std::string("cannot open ") + path.string() +
                  (mode[0] == 'r' ? " for reading" : " for writing"));
  }
  return f;
}

[[noreturn]] void png_fail(png_structp png, png_const_charp msg) {
  auto* what = static_cast<std::string*>(png_get_error_ptr(png));
  if (what) *what = msg;
  png_longjmp(png, 1);
}

void png_warn(png_structp, png_const_charp) {}

struct Decoded {
  std::int64_t height = 0, width = 0;
  int channels = 0, bit_depth = 0;
  std::vector<std::uint8_t> bytes;
};

// libpng reports errors through longjmp, so this frame holds no C++ objects
// with non-trivial destructors across setjmp.
bool decode(std::FILE* f, bool want16, Decoded& out, std::string& error) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, png_fail, png_warn);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return false;
  }
  std::vector<png_bytep>* rows = new std::vector<png_bytep>();
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    delete rows;
    return false;
  }
  png_init_io(png, f);
  png_read_info(png, info);
  const png_byte color = png_get_color_type(png, info);
  const png_byte depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (want16) {
    if (depth < 16) png_set_expand_16(png);
    png_set_swap(png);
  } else if (depth == 16) {
    png_set_strip_16(png);
  }
  png_set_strip_alpha(png);
  png_read_update_info(png, info);
  out.height = png_get_image_height(png, info);
  out.width = png_get_image_width(png, info);
  out.channels = png_get_channels(png, info);
  out.bit_depth = png_get_bit_depth(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  out.bytes.resize(stride * static_cast<std::size_t>(out.height));
  rows->resize(static_cast<std::size_t>(out.height));
  for (std::int64_t y = 0; y < out.height; ++y) (*rows)[y] = out.bytes.data() + stride * y;
  png_read_image(png, rows->data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  delete rows;
  return true;
}

bool encode(std::FILE* f, std::int64_t h, std::int64_t w, int channels, int bit_depth,
            const std::uint8_t* bytes, std::string& error) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, png_fail, png_warn);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_init_io(png, f);
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), bit_depth,
               channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (bit_depth == 16) png_set_swap(png);
  const std::size_t stride = static_cast<std::size_t>(w) * channels * (bit_depth / 8);
  for (std::int64_t y = 0; y < h; ++y) {
    png_write_row(png, const_cast<png_bytep>(bytes + stride * static_cast<std::size_t>(y)));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

}  // namespace

Image read_png(const std::filesystem::path& path) {
  File f = open_file(path, "rb");
  Decoded d;
  std::string error;
  if (!decode(f.get(), false, d, error)) {
    throw FormatError("cannot decode " + path.string() + ": " + error);
  }
  Image img;
  img.height = d.height;
  img.width = d.width;
  img.channels = d.channels == 1 ? 1 : 3;
  if (d.channels == img.channels) {
    img.data = std::move(d.bytes);
  } else {
    throw FormatError("unsupported channel layout in " + path.string());
  }
  return img;
}

void write_png(const std::filesystem::path& path, const Image& image) {
  if (image.channels != 1 && image.channels != 3) {
    throw UsageError("write_png: only gray and RGB images are supported");
  }
  if (image.height < 1 || image.width < 1) throw UsageError("write_png: empty image");
  File f = open_file(path, "wb");
  std::string error;
  if (!encode(f.get(), image.height, image.width, image.channels, 8, image.data.data(), error)) {
    throw IoError("cannot encode " + path.string() + ": " + error);
  }
}

void write_png16(const std::filesystem::path& path, std::int64_t height, std::int64_t width,
                 const std::vector<std::uint16_t>& values) {
  if (values.size() != static_cast<std::size_t>(height * width)) {
    throw UsageError("write_png16: value count does not match extent");
  }
  File f = open_file(path, "wb");
  std::string error;
  if (!encode(f.get(), height, width, 1, 16, reinterpret_cast<const std::uint8_t*>(values.data()),
              error)) {
    throw IoError("cannot encode " + path.string() + ": " + error);
  }
}

std::vector<std::uint16_t> read_png16(const std::filesystem::path& path, std::int64_t& height,
                                      std::int64_t& width) {
  File f = open_file(path, "rb");
  Decoded d;
  std::string error;
  if (!decode(f.get(), true, d, error)) {
    throw FormatError("cannot decode " + path.string() + ": " + error);
  }
  if (d.channels != 1) throw FormatError(path.string() + " is not a grayscale image");
  height = d.height;
  width = d.width;
  std::vector<std::uint16_t> out(static_cast<std::size_t>(d.height * d.width));
  std::memcpy(out.data(), d.bytes.data(), out.size() * 2);
  return out;
}

void image_into_batch(const Image& rgb, Tensor& batch, std::int64_t n) {
  const Shape s = batch.shape();
  if (rgb.channels != 3 || s.c != 3 || rgb.height != s.h || rgb.width != s.w || n >= s.n) {
    throw ShapeError("image " + std::to_string(rgb.height) + "x" + std::to_string(rgb.width) +
                     "x" + std::to_string(rgb.channels) + " does not fit batch " + to_string(s));
  }
  const std::size_t plane = s.plane();
  float* dst = batch.raw() + static_cast<std::size_t>(n) * 3 * plane;
  for (std::size_t i = 0; i < plane; ++i)
    for (int c = 0; c < 3; ++c)
      dst[c * plane + i] = static_cast<float>(rgb.data[i * 3 + c]) / 255.0f - 0.5f;
}

Tensor image_to_tensor(const Image& rgb) {
  Tensor t(Shape{1, 3, rgb.height, rgb.width});
  image_into_batch(rgb, t, 0);
  return t;
}

}  // namespace rootnet
