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
#include "dreamfield/encoding.hpp"
#include "dreamfield/field.hpp"
#include "dreamfield/geometry.hpp"
#include "dreamfield/guidance.hpp"
#include "dreamfield/objective.hpp"
#include "dreamfield/render.hpp"

#include <cstdint>

namespace dreamfield {

/// Fixed settings of the per-iteration loss graph.
struct PipelineConfig {
  int train_resolution = 168;
  int crop_size = 154;
  RenderSettings render;
  CameraModel camera;
  SparsityConfig sparsity;
};

/// Everything drawn from the random streams for one iteration.
template <typename Scalar>
struct StepInputs {
  std::uint64_t seed = 0;
  long iteration = 0;
  CameraPose pose;
  Vec3<double> origin_shift = Vec3<double>::Zero();
  RgbImage<Scalar> background;
  CropWindow crop;
  int view_index = -1;
  double tau = 0.88;
};

template <typename Scalar>
struct StepResult {
  Scalar total_loss = 0;
  Scalar guidance_loss = 0;
  Scalar mean_transmittance = 0;
  Vec3<double> center_of_mass;
  RenderOutput<Scalar> render;
};

/// Runs encode -> field -> render/composite -> crop -> resize -> score ->
/// regularize for one camera. When `grads` is given, it is overwritten with
/// the exact reverse-mode gradient of the total loss with respect to every
/// field tensor. Jitter and density noise come from (seed, iteration) streams,
/// so repeated calls with equal inputs evaluate the same function.
///
/// Throws NumericalError naming the stage if a non-finite value appears.
template <typename Scalar>
StepResult<Scalar> loss_and_gradient(const PipelineConfig& config,
                                     const FieldParams<Scalar>& params,
                                     const FourierBasis<Scalar>& basis,
                                     const StepInputs<Scalar>& inputs, Scorer<Scalar>& scorer,
                                     FieldParams<Scalar>* grads);

}  // namespace dreamfield
