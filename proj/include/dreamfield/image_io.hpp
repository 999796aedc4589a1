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

#pragma once

#include "dreamfield/types.hpp"

#include <filesystem>

namespace dreamfield {

/// 8-bit RGB PNG. Values are clamped to [0, 1] and rounded.
void write_png_rgb(const std::filesystem::path& path, const RgbImage<float>& image);

/// 16-bit grayscale PNG of (value - lo) / (hi - lo), clamped to [0, 1].
void write_png_gray16(const std::filesystem::path& path, const GrayImage<float>& image,
                      double lo = 0.0, double hi = 1.0);

/// Reads 8- or 16-bit gray, gray+alpha, RGB or RGBA PNGs as RGB in [0, 1].
/// Alpha is composited over white. Throws FormatError naming the file when it
/// cannot be decoded.
RgbImage<float> read_png_rgb(const std::filesystem::path& path);

}  // namespace dreamfield
