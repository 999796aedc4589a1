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

#include "dreamfield/augment.hpp"
#include "dreamfield/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dreamfield {

/// Scalar guidance loss and its gradient with respect to every input pixel.
template <typename Scalar>
struct GuidanceResult {
  Scalar loss = 0;
  RgbImage<Scalar> image_gradient;
};

/// Mean squared error to `target` with gradient 2 (image - target) / (H W 3).
template <typename Scalar>
GuidanceResult<Scalar> score_photometric(const RgbImage<Scalar>& image,
                                         const RgbImage<Scalar>& target);

/// Where the scored image came from within the current iteration.
struct ViewContext {
  int view_index = -1;
  CropWindow crop;
};

/// Anything that turns the augmented render into a loss and pixel gradient.
/// The optimizer sees nothing else of the scorer.
template <typename Scalar>
class Scorer {
 public:
  virtual ~Scorer() = default;
  /// Side length the scored image is resized to.
  virtual int input_resolution() const = 0;
  virtual GuidanceResult<Scalar> score(const RgbImage<Scalar>& image, const ViewContext& view) = 0;
};

/// Reconstruction oracle: compares against the posed target view, cropped and
/// resized exactly like the render.
template <typename Scalar>
class PhotometricScorer final : public Scorer<Scalar> {
 public:
  PhotometricScorer(std::vector<RgbImage<Scalar>> targets, int input_resolution);

  int input_resolution() const override { return input_resolution_; }
  GuidanceResult<Scalar> score(const RgbImage<Scalar>& image, const ViewContext& view) override;

  const std::vector<RgbImage<Scalar>>& targets() const { return targets_; }

 private:
  std::vector<RgbImage<Scalar>> targets_;
  int input_resolution_;
};

/// Caption text plus its unit-norm embedding once fetched.
struct Caption {
  std::string text;
  std::optional<Eigen::VectorXf> embedding;
};

}  // namespace dreamfield
