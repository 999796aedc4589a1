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

#include "dreamfield/field.hpp"
#include "dreamfield/types.hpp"

#include <vector>

namespace dreamfield {

struct LearningRateSchedule {
  double initial = 1e-5;
  double final = 1e-4;
  long warmup_iters = 1500;
};

/// Geometric warmup initial -> final over warmup_iters, then constant.
double lr_schedule(long iteration, const LearningRateSchedule& schedule = {});

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-5;
};

/// First and second moments shaped like the parameter list.
template <typename Scalar>
struct OptimState {
  std::vector<MatX<Scalar>> first_moment;
  std::vector<MatX<Scalar>> second_moment;
  long step = 0;

  static OptimState zeros_like(const std::vector<Tensor<Scalar>>& params);
};

/// One bias-corrected Adam update in place. Returns false and leaves
/// everything untouched when any gradient is non-finite.
template <typename Scalar>
bool adam_step(std::vector<Tensor<Scalar>>& params, const std::vector<Tensor<Scalar>>& grads,
               OptimState<Scalar>& state, double lr, const AdamConfig& config = {});

}  // namespace dreamfield
