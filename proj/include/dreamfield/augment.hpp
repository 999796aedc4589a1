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

#include "dreamfield/rng.hpp"
#include "dreamfield/types.hpp"

#include <string>
#include <string_view>

namespace dreamfield {

enum class BackgroundKind { kGaussianNoise, kCheckerboard, kFourierTexture };

BackgroundKind parse_background_kind(std::string_view name);
std::string to_string(BackgroundKind kind);

/// Uniform over the three kinds.
BackgroundKind sample_background_kind(RandomStream& rng);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct BackgroundSpec {
  BackgroundKind kind = BackgroundKind::kGaussianNoise;
  Interval blur_sigma{0.0, 10.0};  // pixels
  Interval tile_size{4.0, 32.0};   // pixels, checkerboard only
  /// Largest spatial frequency (cycles per image) of the Fourier texture.
  int fourier_max_frequency = 8;
  /// Amplitude falls off as 1 / |k|^decay.
  double fourier_decay = 1.0;
  /// Per-pixel N(mean, std^2) before blurring, noise only.
  double noise_mean = 0.5;
  double noise_std = 0.25;
};

/// Background image in [0, 1], blurred with a std drawn from blur_sigma.
template <typename Scalar>
RgbImage<Scalar> make_background(const BackgroundSpec& spec, int resolution, RandomStream& rng);

/// Separable Gaussian blur. Kernel taps falling outside the image are dropped
/// and the remaining weights renormalized. sigma == 0 returns the input.
template <typename Scalar>
RgbImage<Scalar> gaussian_blur(const RgbImage<Scalar>& image, double sigma);

struct CropWindow {
  int y = 0;
  int x = 0;
  int size = 0;
};

CropWindow sample_crop_window(int height, int width, int crop, RandomStream& rng);

template <typename Scalar>
RgbImage<Scalar> crop(const RgbImage<Scalar>& image, const CropWindow& window);

/// Adjoint of crop: scatters the gradient into a zero image of the source size.
template <typename Scalar>
RgbImage<Scalar> crop_backward(const RgbImage<Scalar>& grad, int height, int width,
                               const CropWindow& window);

template <typename Scalar>
struct CropResult {
  RgbImage<Scalar> image;
  CropWindow window;
};

template <typename Scalar>
CropResult<Scalar> random_crop(const RgbImage<Scalar>& image, int crop_size, RandomStream& rng);

/// Bilinear resize to target x target with corner-aligned sampling: output
/// pixel i samples source coordinate i * (H - 1) / (target - 1). A 1-pixel
/// target samples the image center.
template <typename Scalar>
RgbImage<Scalar> resize_bilinear(const RgbImage<Scalar>& image, int target);

/// Adjoint of resize_bilinear.
template <typename Scalar>
RgbImage<Scalar> resize_bilinear_backward(const RgbImage<Scalar>& grad, int height, int width);

}  // namespace dreamfield
