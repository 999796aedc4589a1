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

#include "dreamfield/guidance.hpp"

#include <string>

namespace dreamfield {

template <typename Scalar>
GuidanceResult<Scalar> score_photometric(const RgbImage<Scalar>& image,
                                         const RgbImage<Scalar>& target) {
  if (image.height != target.height || image.width != target.width) {
    throw ArgumentError("score_photometric: image is " + std::to_string(image.height) + "x" +
                        std::to_string(image.width) + " but target is " +
                        std::to_string(target.height) + "x" + std::to_string(target.width));
  }
  const Scalar count = Scalar(image.data.size());
  GuidanceResult<Scalar> out;
  out.image_gradient.height = image.height;
  out.image_gradient.width = image.width;
  const auto diff = (image.data - target.data).eval();
  out.loss = diff.squaredNorm() / count;
  out.image_gradient.data = (Scalar(2) / count) * diff;
  return out;
}

template <typename Scalar>
PhotometricScorer<Scalar>::PhotometricScorer(std::vector<RgbImage<Scalar>> targets,
                                             int input_resolution)
    : targets_(std::move(targets)), input_resolution_(input_resolution) {
  if (targets_.empty()) throw ArgumentError("PhotometricScorer: no target views");
  if (input_resolution_ < 1) throw ArgumentError("PhotometricScorer: bad input resolution");
}

template <typename Scalar>
GuidanceResult<Scalar> PhotometricScorer<Scalar>::score(const RgbImage<Scalar>& image,
                                                        const ViewContext& view) {
  if (view.view_index < 0 || std::size_t(view.view_index) >= targets_.size()) {
    throw ArgumentError("PhotometricScorer: view index " + std::to_string(view.view_index) +
                        " has no target");
  }
  const RgbImage<Scalar>& full = targets_[std::size_t(view.view_index)];
  const RgbImage<Scalar> target = resize_bilinear(crop(full, view.crop), input_resolution_);
  return score_photometric(image, target);
}

template GuidanceResult<float> score_photometric<float>(const RgbImage<float>&,
                                                        const RgbImage<float>&);
template GuidanceResult<double> score_photometric<double>(const RgbImage<double>&,
                                                          const RgbImage<double>&);
template class PhotometricScorer<float>;
template class PhotometricScorer<double>;

}  // namespace dreamfield
