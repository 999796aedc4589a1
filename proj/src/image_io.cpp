// Copyright 2026 The Dreamfield Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dreamfield/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

namespace dreamfield {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr file(std::fopen(path.c_str(), mode));
  if (!file) throw FormatError("cannot open '" + path.string() + "'");
  return file;
}

[[noreturn]] void on_png_error(png_structp png, png_const_charp message) {
  auto* what = static_cast<std::string*>(png_get_error_ptr(png));
  if (what) *what = message;
  png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

template <typename Row>
void write_png(const std::filesystem::path& path, int width, int height, int bit_depth,
               int color_type, const std::vector<Row>& rows) {
  FilePtr file = open_file(path, "wb");
  std::string error;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, on_png_error,
                                            on_png_warning);
  if (!png) throw FormatError("png: out of memory");
  png_infop info = png_create_info_struct(png);
  std::vector<png_bytep> pointers;
  for (const auto& row : rows) pointers.push_back(const_cast<png_bytep>(row.data()));
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw FormatError("cannot write '" + path.string() + "': " + error);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, png_uint_32(width), png_uint_32(height), bit_depth, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, pointers.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

double unit(double v) { return std::clamp(std::isfinite(v) ? v : 0.0, 0.0, 1.0); }

}  // namespace

void write_png_rgb(const std::filesystem::path& path, const RgbImage<float>& image) {
  std::vector<std::vector<unsigned char>> rows(std::size_t(image.height),
                                               std::vector<unsigned char>(3 * image.width));
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        rows[y][3 * x + c] = (unsigned char)std::lround(255.0 * unit(image.pixel(y, x)(c)));
      }
    }
  }
  write_png(path, image.width, image.height, 8, PNG_COLOR_TYPE_RGB, rows);
}

void write_png_gray16(const std::filesystem::path& path, const GrayImage<float>& image,
                      double lo, double hi) {
  if (!(hi > lo)) throw ArgumentError("write_png_gray16: need hi > lo");
  std::vector<std::vector<unsigned char>> rows(std::size_t(image.height),
                                               std::vector<unsigned char>(2 * image.width));
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const auto v = std::uint16_t(std::lround(65535.0 * unit((image.pixel(y, x)(0) - lo) / (hi - lo))));
      rows[y][2 * x] = (unsigned char)(v >> 8);  // PNG stores 16-bit samples big-endian
      rows[y][2 * x + 1] = (unsigned char)(v & 0xff);
    }
  }
  write_png(path, image.width, image.height, 16, PNG_COLOR_TYPE_GRAY, rows);
}

RgbImage<float> read_png_rgb(const std::filesystem::path& path) {
  FilePtr file = open_file(path, "rb");
  unsigned char signature[8];
  if (std::fread(signature, 1, 8, file.get()) != 8 || png_sig_cmp(signature, 0, 8) != 0) {
    throw FormatError("'" + path.string() + "' is not a PNG file");
  }
  std::string error;
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, on_png_error, on_png_warning);
  if (!png) throw FormatError("png: out of memory");
  png_infop info = png_create_info_struct(png);
  std::vector<std::vector<unsigned char>> rows;
  RgbImage<float> image;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("cannot decode '" + path.string() + "': " + error);
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  png_set_expand(png);
  png_set_strip_16(png);
  png_set_gray_to_rgb(png);
  png_set_add_alpha(png, 0xff, PNG_FILLER_AFTER);
  png_read_update_info(png, info);
  const int width = int(png_get_image_width(png, info));
  const int height = int(png_get_image_height(png, info));
  const std::size_t row_bytes = png_get_rowbytes(png, info);
  rows.assign(std::size_t(height), std::vector<unsigned char>(row_bytes));
  std::vector<png_bytep> pointers;
  for (auto& row : rows) pointers.push_back(row.data());
  png_read_image(png, pointers.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  image = RgbImage<float>(height, width);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const unsigned char* px = rows[y].data() + 4 * x;
      const float alpha = float(px[3]) / 255.0f;
      for (int c = 0; c < 3; ++c) {
        image.pixel(y, x)(c) = alpha * (float(px[c]) / 255.0f) + (1.0f - alpha);
      }
    }
  }
  return image;
}

}  // namespace dreamfield
