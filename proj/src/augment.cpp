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

#include "dreamfield/augment.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace dreamfield {

namespace {

struct LinearTap {
  int i0;
  int i1;
  double frac;
};

std::vector<LinearTap> resize_taps(int source, int target) {
  std::vector<LinearTap> taps(std::size_t(target), LinearTap{0, 0, 0.0});
  for (int i = 0; i < target; ++i) {
    const double coord =
        target == 1 ? 0.5 * (source - 1) : double(i) * (source - 1) / double(target - 1);
    int i0 = std::clamp(int(std::floor(coord)), 0, source - 1);
    const int i1 = std::min(i0 + 1, source - 1);
    taps[std::size_t(i)] = {i0, i1, coord - i0};
  }
  return taps;
}

std::vector<double> gaussian_kernel(double sigma, int& radius) {
  radius = int(std::ceil(3.0 * sigma));
  std::vector<double> k(std::size_t(2 * radius + 1));
  for (int d = -radius; d <= radius; ++d) {
    k[std::size_t(d + radius)] = std::exp(-0.5 * d * d / (sigma * sigma));
  }
  return k;
}

void check_interval(const Interval& interval, double min_lo, const char* what) {
  if (!(interval.lo >= min_lo) || !(interval.hi >= interval.lo)) {
    throw ConfigError(std::string("background: invalid ") + what + " range");
  }
}

template <typename Scalar>
RgbImage<Scalar> fourier_texture(const BackgroundSpec& spec, int res, RandomStream& rng) {
  using Complex = std::complex<double>;
  using CMat = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>;
  const int kmax = std::max(0, spec.fourier_max_frequency);
  const int nk = 2 * kmax + 1;

  CMat basis(res, nk);  // e^{2 pi i k p / res}
  for (int p = 0; p < res; ++p) {
    for (int k = -kmax; k <= kmax; ++k) {
      basis(p, k + kmax) = std::polar(1.0, 2.0 * std::numbers::pi * k * p / res);
    }
  }

  RgbImage<Scalar> out(res, res);
  for (int c = 0; c < 3; ++c) {
    CMat coeff(nk, nk);
    for (int ky = -kmax; ky <= kmax; ++ky) {
      for (int kx = -kmax; kx <= kmax; ++kx) {
        const double freq = std::max(1.0, std::hypot(double(kx), double(ky)));
        const double amp = std::pow(freq, -spec.fourier_decay);
        const double re = rng.normal();
        const double im = rng.normal();
        coeff(ky + kmax, kx + kmax) = amp * Complex(re, im);
      }
    }
    const Eigen::MatrixXd field = (basis * coeff * basis.transpose()).real();
    const double lo = field.minCoeff();
    const double hi = field.maxCoeff();
    for (int y = 0; y < res; ++y) {
      for (int x = 0; x < res; ++x) {
        const double v = hi - lo > 1e-12 ? (field(y, x) - lo) / (hi - lo) : 0.5;
        out.data(out.index(y, x), c) = Scalar(v);
      }
    }
  }
  return out;
}

}  // namespace

BackgroundKind parse_background_kind(std::string_view name) {
  if (name == "gaussian_noise") return BackgroundKind::kGaussianNoise;
  if (name == "checkerboard") return BackgroundKind::kCheckerboard;
  if (name == "fourier_texture") return BackgroundKind::kFourierTexture;
  throw ConfigError("unknown background kind '" + std::string(name) + "'");
}

std::string to_string(BackgroundKind kind) {
  switch (kind) {
    case BackgroundKind::kGaussianNoise: return "gaussian_noise";
    case BackgroundKind::kCheckerboard: return "checkerboard";
    case BackgroundKind::kFourierTexture: return "fourier_texture";
  }
  throw ConfigError("unknown background kind");
}

BackgroundKind sample_background_kind(RandomStream& rng) {
  return static_cast<BackgroundKind>(rng.uniform_index(3));
}

template <typename Scalar>
RgbImage<Scalar> gaussian_blur(const RgbImage<Scalar>& image, double sigma) {
  if (sigma < 0.0) throw ArgumentError("gaussian_blur: sigma must be non-negative");
  if (sigma == 0.0) return image;
  int radius = 0;
  const std::vector<double> kernel = gaussian_kernel(sigma, radius);
  const int h = image.height;
  const int w = image.width;

  Eigen::MatrixXd tmp(Index(h) * w, 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      Eigen::RowVector3d acc = Eigen::RowVector3d::Zero();
      double norm = 0.0;
      for (int xx = std::max(0, x - radius); xx <= std::min(w - 1, x + radius); ++xx) {
        const double k = kernel[std::size_t(xx - x + radius)];
        acc += k * image.data.row(image.index(y, xx)).template cast<double>();
        norm += k;
      }
      tmp.row(image.index(y, x)) = acc / norm;
    }
  }
  RgbImage<Scalar> out(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      Eigen::RowVector3d acc = Eigen::RowVector3d::Zero();
      double norm = 0.0;
      for (int yy = std::max(0, y - radius); yy <= std::min(h - 1, y + radius); ++yy) {
        const double k = kernel[std::size_t(yy - y + radius)];
        acc += k * tmp.row(image.index(yy, x));
        norm += k;
      }
      out.data.row(out.index(y, x)) = (acc / norm).cast<Scalar>();
    }
  }
  return out;
}

template <typename Scalar>
RgbImage<Scalar> make_background(const BackgroundSpec& spec, int resolution, RandomStream& rng) {
  if (resolution < 1) throw ArgumentError("make_background: resolution must be >= 1");
  check_interval(spec.blur_sigma, 0.0, "blur sigma");

  RgbImage<Scalar> image(resolution, resolution);
  switch (spec.kind) {
    case BackgroundKind::kGaussianNoise: {
      for (Index i = 0; i < image.data.size(); ++i) {
        image.data.data()[i] = Scalar(spec.noise_mean + spec.noise_std * rng.normal());
      }
      break;
    }
    case BackgroundKind::kCheckerboard: {
      check_interval(spec.tile_size, 1.0, "tile size");
      const int lo = int(std::ceil(spec.tile_size.lo));
      const int hi = std::max(lo, int(std::floor(spec.tile_size.hi)));
      const int tile = lo + int(rng.uniform_index(std::uint64_t(hi - lo + 1)));
      Eigen::Matrix<Scalar, 1, 3> colors[2];
      for (auto& color : colors) {
        color << Scalar(rng.uniform()), Scalar(rng.uniform()), Scalar(rng.uniform());
      }
      for (int y = 0; y < resolution; ++y) {
        for (int x = 0; x < resolution; ++x) {
          image.pixel(y, x) = colors[((y / tile) + (x / tile)) % 2];
        }
      }
      break;
    }
    case BackgroundKind::kFourierTexture:
      image = fourier_texture<Scalar>(spec, resolution, rng);
      break;
    default:
      throw ConfigError("make_background: unknown background kind");
  }

  const double sigma = rng.uniform(spec.blur_sigma.lo, spec.blur_sigma.hi);
  image = gaussian_blur(image, sigma);
  image.data = image.data.cwiseMax(Scalar(0)).cwiseMin(Scalar(1));
  return image;
}

CropWindow sample_crop_window(int height, int width, int crop_size, RandomStream& rng) {
  if (crop_size < 1 || crop_size > height || crop_size > width) {
    throw ArgumentError("random_crop: crop size " + std::to_string(crop_size) +
                        " does not fit a " + std::to_string(height) + "x" +
                        std::to_string(width) + " image");
  }
  CropWindow window;
  window.size = crop_size;
  window.y = int(rng.uniform_index(std::uint64_t(height - crop_size + 1)));
  window.x = int(rng.uniform_index(std::uint64_t(width - crop_size + 1)));
  return window;
}

template <typename Scalar>
RgbImage<Scalar> crop(const RgbImage<Scalar>& image, const CropWindow& window) {
  if (window.y < 0 || window.x < 0 || window.y + window.size > image.height ||
      window.x + window.size > image.width) {
    throw ArgumentError("crop: window outside the image");
  }
  RgbImage<Scalar> out(window.size, window.size);
  for (int y = 0; y < window.size; ++y) {
    out.data.middleRows(out.index(y, 0), window.size) =
        image.data.middleRows(image.index(window.y + y, window.x), window.size);
  }
  return out;
}

template <typename Scalar>
RgbImage<Scalar> crop_backward(const RgbImage<Scalar>& grad, int height, int width,
                               const CropWindow& window) {
  RgbImage<Scalar> out(height, width);
  for (int y = 0; y < window.size; ++y) {
    out.data.middleRows(out.index(window.y + y, window.x), window.size) =
        grad.data.middleRows(grad.index(y, 0), window.size);
  }
  return out;
}

template <typename Scalar>
CropResult<Scalar> random_crop(const RgbImage<Scalar>& image, int crop_size, RandomStream& rng) {
  const CropWindow window = sample_crop_window(image.height, image.width, crop_size, rng);
  return {crop(image, window), window};
}

template <typename Scalar>
RgbImage<Scalar> resize_bilinear(const RgbImage<Scalar>& image, int target) {
  if (target < 1) throw ArgumentError("resize_bilinear: target must be >= 1");
  const auto ys = resize_taps(image.height, target);
  const auto xs = resize_taps(image.width, target);
  RgbImage<Scalar> out(target, target);
  for (int y = 0; y < target; ++y) {
    const auto& ty = ys[std::size_t(y)];
    const Scalar fy = Scalar(ty.frac);
    for (int x = 0; x < target; ++x) {
      const auto& tx = xs[std::size_t(x)];
      const Scalar fx = Scalar(tx.frac);
      out.pixel(y, x) = (Scalar(1) - fy) * ((Scalar(1) - fx) * image.pixel(ty.i0, tx.i0) +
                                            fx * image.pixel(ty.i0, tx.i1)) +
                        fy * ((Scalar(1) - fx) * image.pixel(ty.i1, tx.i0) +
                              fx * image.pixel(ty.i1, tx.i1));
    }
  }
  return out;
}

template <typename Scalar>
RgbImage<Scalar> resize_bilinear_backward(const RgbImage<Scalar>& grad, int height, int width) {
  const auto ys = resize_taps(height, grad.height);
  const auto xs = resize_taps(width, grad.width);
  RgbImage<Scalar> out(height, width);
  for (int y = 0; y < grad.height; ++y) {
    const auto& ty = ys[std::size_t(y)];
    const Scalar fy = Scalar(ty.frac);
    for (int x = 0; x < grad.width; ++x) {
      const auto& tx = xs[std::size_t(x)];
      const Scalar fx = Scalar(tx.frac);
      const auto g = grad.pixel(y, x);
      out.pixel(ty.i0, tx.i0) += (Scalar(1) - fy) * (Scalar(1) - fx) * g;
      out.pixel(ty.i0, tx.i1) += (Scalar(1) - fy) * fx * g;
      out.pixel(ty.i1, tx.i0) += fy * (Scalar(1) - fx) * g;
      out.pixel(ty.i1, tx.i1) += fy * fx * g;
    }
  }
  return out;
}

#define DREAMFIELD_INSTANTIATE(S)                                                              \
  template RgbImage<S> make_background<S>(const BackgroundSpec&, int, RandomStream&);         \
  template RgbImage<S> gaussian_blur<S>(const RgbImage<S>&, double);                          \
  template RgbImage<S> crop<S>(const RgbImage<S>&, const CropWindow&);                        \
  template RgbImage<S> crop_backward<S>(const RgbImage<S>&, int, int, const CropWindow&);     \
  template CropResult<S> random_crop<S>(const RgbImage<S>&, int, RandomStream&);              \
  template RgbImage<S> resize_bilinear<S>(const RgbImage<S>&, int);                           \
  template RgbImage<S> resize_bilinear_backward<S>(const RgbImage<S>&, int, int);

DREAMFIELD_INSTANTIATE(float)
DREAMFIELD_INSTANTIATE(double)

#undef DREAMFIELD_INSTANTIATE

}  // namespace dreamfield
