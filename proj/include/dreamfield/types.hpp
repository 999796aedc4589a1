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

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace dreamfield {

using Index = Eigen::Index;

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;

template <typename Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// One 3-vector per row.
template <typename Scalar>
using Points = Eigen::Matrix<Scalar, Eigen::Dynamic, 3>;

/// Dense image with `Channels` values per pixel. Pixel (y, x) lives in row
/// `y * width + x` of `data`.
template <typename Scalar, int Channels>
struct Image {
  using Data = Eigen::Matrix<Scalar, Eigen::Dynamic, Channels>;

  int height = 0;
  int width = 0;
  Data data;

  Image() = default;
  Image(int h, int w) : height(h), width(w), data(Data::Zero(Index(h) * w, Channels)) {}

  static Image constant(int h, int w, const Eigen::Matrix<Scalar, 1, Channels>& value) {
    Image img(h, w);
    img.data.rowwise() = value;
    return img;
  }

  Index pixel_count() const { return Index(height) * width; }
  Index index(int y, int x) const { return Index(y) * width + x; }

  auto pixel(int y, int x) { return data.row(index(y, x)); }
  auto pixel(int y, int x) const { return data.row(index(y, x)); }

  template <typename Other>
  Image<Other, Channels> cast() const {
    Image<Other, Channels> out;
    out.height = height;
    out.width = width;
    out.data = data.template cast<Other>();
    return out;
  }
};

template <typename Scalar>
using RgbImage = Image<Scalar, 3>;

template <typename Scalar>
using GrayImage = Image<Scalar, 1>;

/// Invalid run or component configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller passed an argument outside an operation's precondition.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A non-finite value appeared inside a differentiated computation.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unreadable or incompatible file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeMismatchError : public FormatError {
 public:
  using FormatError::FormatError;
};

}  // namespace dreamfield
